#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace scm {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Undirected neighbourhood relation over `num_areas` areas.
///
/// Edges are stored once as (lo, hi) pairs, sorted and deduplicated, so two
/// graphs built from the same relation compare equal regardless of input order.
class AreaGraph {
 public:
  AreaGraph() = default;

  /// Rejects self-loops and out-of-range indices with std::invalid_argument.
  AreaGraph(int num_areas, const std::vector<std::pair<int, int>>& edges);

  int num_areas() const { return num_areas_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<int>& neighbours(int area) const { return adjacency_[area]; }
  int degree(int area) const { return static_cast<int>(adjacency_[area].size()); }

  /// Connected-component label per area, labels numbered in order of the
  /// smallest area index they contain.
  const std::vector<int>& components() const { return component_; }
  int num_components() const { return num_components_; }

  bool operator==(const AreaGraph& other) const {
    return num_areas_ == other.num_areas_ && edges_ == other.edges_;
  }

 private:
  int num_areas_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adjacency_;
  std::vector<int> component_;
  int num_components_ = 0;
};

AreaGraph build_area_graph(int num_areas, const std::vector<std::pair<int, int>>& edges);

/// Parses the plain-text adjacency format: a header line "areas A", then one
/// "i j" edge per line with 0-based indices. '#' starts a comment.
AreaGraph read_adjacency(std::istream& in);
AreaGraph read_adjacency(const std::filesystem::path& path);
void write_adjacency(std::ostream& out, const AreaGraph& graph);

enum class StructureKind { ICAR, RW1, IID, TypeI, TypeII, TypeIII, TypeIV };

enum class InteractionType { I, II, III, IV, None };

std::string_view to_string(StructureKind kind);
std::string_view to_string(InteractionType type);
InteractionType parse_interaction_type(std::string_view text);

/// Symmetric positive-semidefinite precision structure with a declared rank
/// deficiency.
struct StructureMatrix {
  StructureKind kind = StructureKind::IID;
  SparseMatrix entries;
  int null_dim = 0;

  int dim() const { return static_cast<int>(entries.rows()); }
  int rank() const { return dim() - null_dim; }
};

/// Linear sum-to-zero restrictions on one latent block; one constraint per row.
struct ConstraintSet {
  Eigen::MatrixXd matrix;
  std::string block_label;

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

/// Besag structure: diag(degree) - adjacency. null_dim = number of components.
StructureMatrix icar_structure(const AreaGraph& graph);

/// First-order random walk structure over `num_years` time points.
StructureMatrix rw1_structure(int num_years);

StructureMatrix iid_structure(int dim);

/// Knorr-Held interaction structure over the latent vector ordered
/// area-fastest: index = t * A + i.
///
///   Type I   : I_T (x) I_A
///   Type II  : R_gamma (x) I_A
///   Type III : I_T (x) R_kappa
///   Type IV  : R_gamma (x) R_kappa
StructureMatrix interaction_structure(InteractionType type, const StructureMatrix& r_gamma,
                                      const StructureMatrix& r_kappa);

/// Sum-to-zero constraints for the spatial ICAR block, one row per component.
ConstraintSet icar_constraints(const AreaGraph& graph);

/// Single sum-to-zero row over a block of length `dim`.
ConstraintSet sum_to_zero(int dim, std::string label);

/// Identifiability constraints for an interaction block (connected graph).
///
/// Type I: grand sum; Type II: sum over t for each area; Type III: sum over
/// areas for each year; Type IV: both families with the last row of the
/// per-area family dropped.
ConstraintSet constraints_for(InteractionType type, int num_areas, int num_years);

/// Same as above, with the per-year sums taken within each connected
/// component of `graph`. For Type IV one per-area row is dropped per
/// component (the row of that component's last area).
ConstraintSet constraints_for(InteractionType type, const AreaGraph& graph, int num_years);

/// Kronecker product of two sparse matrices: (left (x) right).
SparseMatrix kronecker(const SparseMatrix& left, const SparseMatrix& right);

SparseMatrix sparse_identity(int dim);

}  // namespace scm
