#include "scm/graph.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace scm {

namespace {

using Triplet = Eigen::Triplet<double>;

std::vector<int> label_components(int n, const std::vector<std::vector<int>>& adjacency,
                                  int& count) {
  std::vector<int> label(n, -1);
  count = 0;
  std::vector<int> stack;
  for (int start = 0; start < n; ++start) {
    if (label[start] >= 0) continue;
    label[start] = count;
    stack.push_back(start);
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int w : adjacency[v]) {
        if (label[w] < 0) {
          label[w] = count;
          stack.push_back(w);
        }
      }
    }
    ++count;
  }
  return label;
}

}  // namespace

AreaGraph::AreaGraph(int num_areas, const std::vector<std::pair<int, int>>& edges)
    : num_areas_(num_areas) {
  if (num_areas < 1) throw std::invalid_argument("AreaGraph: num_areas must be positive");
  edges_.reserve(edges.size());
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= num_areas || b >= num_areas) {
      throw std::invalid_argument("AreaGraph: edge (" + std::to_string(a) + ", " +
                                  std::to_string(b) + ") out of range");
    }
    if (a == b) {
      throw std::invalid_argument("AreaGraph: self-loop on area " + std::to_string(a));
    }
    edges_.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  adjacency_.assign(num_areas, {});
  for (auto [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
  component_ = label_components(num_areas, adjacency_, num_components_);
}

AreaGraph build_area_graph(int num_areas, const std::vector<std::pair<int, int>>& edges) {
  return AreaGraph(num_areas, edges);
}

AreaGraph read_adjacency(std::istream& in) {
  int num_areas = -1;
  std::vector<std::pair<int, int>> edges;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::string first;
    if (!(fields >> first)) continue;
    if (first == "areas") {
      if (num_areas >= 0) {
        throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                    ": duplicate 'areas' header");
      }
      if (!(fields >> num_areas) || num_areas < 1) {
        throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                    ": expected 'areas A' with A >= 1");
      }
      continue;
    }
    if (num_areas < 0) {
      throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                  ": edge before 'areas' header");
    }
    int a = 0;
    int b = 0;
    std::istringstream pair_fields(line);
    std::string trailing;
    if (!(pair_fields >> a >> b) || (pair_fields >> trailing)) {
      throw std::invalid_argument("adjacency line " + std::to_string(line_no) +
                                  ": expected two integer indices");
    }
    edges.emplace_back(a, b);
  }
  if (num_areas < 0) throw std::invalid_argument("adjacency: missing 'areas' header");
  return AreaGraph(num_areas, edges);
}

AreaGraph read_adjacency(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open adjacency file " + path.string());
  return read_adjacency(in);
}

void write_adjacency(std::ostream& out, const AreaGraph& graph) {
  out << "areas " << graph.num_areas() << '\n';
  for (auto [a, b] : graph.edges()) out << a << ' ' << b << '\n';
}

std::string_view to_string(StructureKind kind) {
  switch (kind) {
    case StructureKind::ICAR: return "ICAR";
    case StructureKind::RW1: return "RW1";
    case StructureKind::IID: return "IID";
    case StructureKind::TypeI: return "TypeI";
    case StructureKind::TypeII: return "TypeII";
    case StructureKind::TypeIII: return "TypeIII";
    case StructureKind::TypeIV: return "TypeIV";
  }
  return "?";
}

std::string_view to_string(InteractionType type) {
  switch (type) {
    case InteractionType::I: return "I";
    case InteractionType::II: return "II";
    case InteractionType::III: return "III";
    case InteractionType::IV: return "IV";
    case InteractionType::None: return "none";
  }
  return "?";
}

InteractionType parse_interaction_type(std::string_view text) {
  if (text == "I" || text == "1" || text == "TypeI") return InteractionType::I;
  if (text == "II" || text == "2" || text == "TypeII") return InteractionType::II;
  if (text == "III" || text == "3" || text == "TypeIII") return InteractionType::III;
  if (text == "IV" || text == "4" || text == "TypeIV") return InteractionType::IV;
  if (text == "none" || text == "None") return InteractionType::None;
  throw std::invalid_argument("unknown interaction type '" + std::string(text) + "'");
}

SparseMatrix sparse_identity(int dim) {
  SparseMatrix eye(dim, dim);
  eye.setIdentity();
  return eye;
}

SparseMatrix kronecker(const SparseMatrix& left, const SparseMatrix& right) {
  const Eigen::Index rows = left.rows() * right.rows();
  const Eigen::Index cols = left.cols() * right.cols();
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(left.nonZeros() * right.nonZeros()));
  for (Eigen::Index lk = 0; lk < left.outerSize(); ++lk) {
    for (SparseMatrix::InnerIterator l(left, lk); l; ++l) {
      for (Eigen::Index rk = 0; rk < right.outerSize(); ++rk) {
        for (SparseMatrix::InnerIterator r(right, rk); r; ++r) {
          triplets.emplace_back(static_cast<int>(l.row() * right.rows() + r.row()),
                                static_cast<int>(l.col() * right.cols() + r.col()),
                                l.value() * r.value());
        }
      }
    }
  }
  SparseMatrix out(rows, cols);
  out.setFromTriplets(triplets.begin(), triplets.end());
  return out;
}

StructureMatrix icar_structure(const AreaGraph& graph) {
  const int n = graph.num_areas();
  if (n < 2) throw std::invalid_argument("icar_structure: need at least 2 areas");
  std::vector<Triplet> triplets;
  for (int i = 0; i < n; ++i) {
    if (graph.degree(i) > 0) triplets.emplace_back(i, i, graph.degree(i));
  }
  for (auto [a, b] : graph.edges()) {
    triplets.emplace_back(a, b, -1.0);
    triplets.emplace_back(b, a, -1.0);
  }
  StructureMatrix out;
  out.kind = StructureKind::ICAR;
  out.entries.resize(n, n);
  out.entries.setFromTriplets(triplets.begin(), triplets.end());
  out.null_dim = graph.num_components();
  return out;
}

StructureMatrix rw1_structure(int num_years) {
  if (num_years < 2) throw std::invalid_argument("rw1_structure: need at least 2 time points");
  std::vector<Triplet> triplets;
  for (int t = 0; t < num_years; ++t) {
    const bool edge = (t == 0 || t == num_years - 1);
    triplets.emplace_back(t, t, edge ? 1.0 : 2.0);
    if (t + 1 < num_years) {
      triplets.emplace_back(t, t + 1, -1.0);
      triplets.emplace_back(t + 1, t, -1.0);
    }
  }
  StructureMatrix out;
  out.kind = StructureKind::RW1;
  out.entries.resize(num_years, num_years);
  out.entries.setFromTriplets(triplets.begin(), triplets.end());
  out.null_dim = 1;
  return out;
}

StructureMatrix iid_structure(int dim) {
  if (dim < 1) throw std::invalid_argument("iid_structure: dim must be positive");
  return StructureMatrix{StructureKind::IID, sparse_identity(dim), 0};
}

StructureMatrix interaction_structure(InteractionType type, const StructureMatrix& r_gamma,
                                      const StructureMatrix& r_kappa) {
  const int num_years = r_gamma.dim();
  const int num_areas = r_kappa.dim();
  const SparseMatrix eye_t = sparse_identity(num_years);
  const SparseMatrix eye_a = sparse_identity(num_areas);

  StructureMatrix out;
  int time_rank = num_years;
  int space_rank = num_areas;
  switch (type) {
    case InteractionType::I:
      out.kind = StructureKind::TypeI;
      out.entries = kronecker(eye_t, eye_a);
      break;
    case InteractionType::II:
      out.kind = StructureKind::TypeII;
      out.entries = kronecker(r_gamma.entries, eye_a);
      time_rank = r_gamma.rank();
      break;
    case InteractionType::III:
      out.kind = StructureKind::TypeIII;
      out.entries = kronecker(eye_t, r_kappa.entries);
      space_rank = r_kappa.rank();
      break;
    case InteractionType::IV:
      out.kind = StructureKind::TypeIV;
      out.entries = kronecker(r_gamma.entries, r_kappa.entries);
      time_rank = r_gamma.rank();
      space_rank = r_kappa.rank();
      break;
    case InteractionType::None:
      throw std::invalid_argument("interaction_structure: interaction type 'none' has no structure");
  }
  out.null_dim = num_years * num_areas - time_rank * space_rank;
  return out;
}

ConstraintSet sum_to_zero(int dim, std::string label) {
  return ConstraintSet{Eigen::MatrixXd::Ones(1, dim), std::move(label)};
}

ConstraintSet icar_constraints(const AreaGraph& graph) {
  const int n = graph.num_areas();
  ConstraintSet out{Eigen::MatrixXd::Zero(graph.num_components(), n), "kappa"};
  for (int i = 0; i < n; ++i) out.matrix(graph.components()[i], i) = 1.0;
  return out;
}

ConstraintSet constraints_for(InteractionType type, int num_areas, int num_years) {
  std::vector<std::pair<int, int>> chain;
  for (int i = 0; i + 1 < num_areas; ++i) chain.emplace_back(i, i + 1);
  return constraints_for(type, AreaGraph(num_areas, chain), num_years);
}

ConstraintSet constraints_for(InteractionType type, const AreaGraph& graph, int num_years) {
  const int A = graph.num_areas();
  const int T = num_years;
  if (A < 1 || T < 1) throw std::invalid_argument("constraints_for: empty grid");
  const int C = graph.num_components();
  const auto& comp = graph.components();
  const int n = A * T;

  std::vector<Eigen::RowVectorXd> rows;
  auto per_year = [&] {
    for (int t = 0; t < T; ++t) {
      for (int c = 0; c < C; ++c) {
        Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
        for (int i = 0; i < A; ++i) {
          if (comp[i] == c) row(t * A + i) = 1.0;
        }
        rows.push_back(std::move(row));
      }
    }
  };
  auto per_area = [&](bool drop_last_per_component) {
    std::vector<int> last_area(C, -1);
    for (int i = 0; i < A; ++i) last_area[comp[i]] = i;
    for (int i = 0; i < A; ++i) {
      if (drop_last_per_component && last_area[comp[i]] == i) continue;
      Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(n);
      for (int t = 0; t < T; ++t) row(t * A + i) = 1.0;
      rows.push_back(std::move(row));
    }
  };

  switch (type) {
    case InteractionType::I:
      rows.push_back(Eigen::RowVectorXd::Ones(n));
      break;
    case InteractionType::II:
      per_area(false);
      break;
    case InteractionType::III:
      per_year();
      break;
    case InteractionType::IV:
      per_year();
      per_area(true);
      break;
    case InteractionType::None:
      throw std::invalid_argument("constraints_for: interaction type 'none' has no constraints");
  }

  ConstraintSet out;
  out.block_label = "chi";
  out.matrix.resize(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t r = 0; r < rows.size(); ++r) out.matrix.row(static_cast<Eigen::Index>(r)) = rows[r];
  return out;
}

}  // namespace scm
