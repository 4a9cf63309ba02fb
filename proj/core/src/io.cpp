#include "scm/io.hpp"

#include "scm/csv.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <vector>

namespace scm {

namespace {

struct Header {
  std::map<std::string, std::size_t> columns;

  std::optional<std::size_t> find(const std::string& name) const {
    const auto it = columns.find(name);
    if (it == columns.end()) return std::nullopt;
    return it->second;
  }
};

Header parse_header(const std::string& line, const std::string& source) {
  Header h;
  const auto fields = split_csv_line(line);
  for (std::size_t k = 0; k < fields.size(); ++k) {
    if (!h.columns.emplace(fields[k], k).second) {
      throw InputError(source + ": duplicate column '" + fields[k] + "'");
    }
  }
  return h;
}

std::string where(const std::string& source, int row) {
  return source + " row " + std::to_string(row);
}

template <typename T>
T parse_integer(const std::string& text, const std::string& what, const std::string& ctx) {
  T value{};
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError(ctx + ": invalid " + what + " '" + text + "'");
  }
  return value;
}

double parse_real(const std::string& text, const std::string& what, const std::string& ctx) {
  double value = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), value);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    throw InputError(ctx + ": invalid " + what + " '" + text + "'");
  }
  return value;
}

const std::string& field(const std::vector<std::string>& fields, std::optional<std::size_t> col,
                         const std::string& ctx) {
  static const std::string empty;
  if (!col) return empty;
  if (*col >= fields.size()) throw InputError(ctx + ": too few fields");
  return fields[*col];
}

bool next_record(std::istream& in, std::string& line, int& row) {
  while (std::getline(in, line)) {
    ++row;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    return true;
  }
  return false;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

}  // namespace

std::string_view to_string(Disease d) {
  return d == Disease::Incidence ? "incidence" : "mortality";
}

Disease parse_disease(std::string_view text) {
  if (text == "incidence" || text == "I") return Disease::Incidence;
  if (text == "mortality" || text == "M") return Disease::Mortality;
  throw InputError("unknown disease '" + std::string(text) + "'");
}

PopulationTable read_populations(std::istream& in, const std::string& source) {
  std::string line;
  int row = 0;
  if (!next_record(in, line, row)) throw InputError(source + ": empty file");
  const Header h = parse_header(line, source);
  const auto c_area = h.find("area_id");
  const auto c_year = h.find("year");
  const auto c_dis = h.find("disease");
  const auto c_pop = h.find("population");
  if (!c_area || !c_year || !c_dis || !c_pop) {
    throw InputError(source + ": expected columns area_id, year, disease, population");
  }
  PopulationTable table;
  while (next_record(in, line, row)) {
    const auto ctx = where(source, row);
    const auto fields = split_csv_line(line);
    const int area = parse_integer<int>(field(fields, c_area, ctx), "area_id", ctx);
    const int year = parse_integer<int>(field(fields, c_year, ctx), "year", ctx);
    const Disease d = parse_disease(field(fields, c_dis, ctx));
    const double pop = parse_real(field(fields, c_pop, ctx), "population", ctx);
    if (!(pop > 0.0)) throw InputError(ctx + ": population must be positive");
    if (!table.emplace(std::make_tuple(area, year, d), pop).second) {
      throw InputError(ctx + ": duplicate row for area " + std::to_string(area) + ", year " +
                       std::to_string(year) + ", " + std::string(to_string(d)));
    }
  }
  return table;
}

PopulationTable load_populations(const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_populations(in, path.string());
}

PopulationProjection projection_from(const PopulationTable& table) {
  return [table](int area, int year, Disease d) -> std::optional<double> {
    const auto it = table.find({area, year, d});
    if (it == table.end()) return std::nullopt;
    return it->second;
  };
}

ObservationPanel read_panel(std::istream& in, const PopulationTable* populations, PanelLoadReport* report,
                            const std::string& source) {
  std::string line;
  int row = 0;
  if (!next_record(in, line, row)) throw InputError(source + ": empty file");
  const Header h = parse_header(line, source);
  const auto c_area = h.find("area_id");
  const auto c_year = h.find("year");
  const auto c_dis = h.find("disease");
  const auto c_count = h.find("count");
  const auto c_pop = h.find("population");
  if (!c_area || !c_year || !c_dis || !c_count) {
    throw InputError(source + ": expected columns area_id, year, disease, count, population");
  }

  struct Record {
    int row;
    int area;
    int year;
    Disease disease;
    std::optional<std::int64_t> count;
    std::optional<double> population;
  };
  std::vector<Record> records;
  std::map<std::tuple<int, int, Disease>, int> seen;
  while (next_record(in, line, row)) {
    const auto ctx = where(source, row);
    const auto fields = split_csv_line(line);
    Record r{row, 0, 0, Disease::Incidence, std::nullopt, std::nullopt};
    r.area = parse_integer<int>(field(fields, c_area, ctx), "area_id", ctx);
    if (r.area < 0) throw InputError(ctx + ": area_id must be non-negative");
    r.year = parse_integer<int>(field(fields, c_year, ctx), "year", ctx);
    r.disease = parse_disease(field(fields, c_dis, ctx));
    const std::string& count = field(fields, c_count, ctx);
    if (!count.empty()) {
      r.count = parse_integer<std::int64_t>(count, "count", ctx);
      if (*r.count < 0) throw InputError(ctx + ": negative count");
    }
    const std::string& pop = field(fields, c_pop, ctx);
    if (!pop.empty()) {
      r.population = parse_real(pop, "population", ctx);
    } else if (populations) {
      const auto it = populations->find({r.area, r.year, r.disease});
      if (it != populations->end()) r.population = it->second;
    }
    if (!r.population) throw InputError(ctx + ": missing population");
    if (!(*r.population > 0.0)) throw InputError(ctx + ": population must be positive");
    const auto key = std::make_tuple(r.area, r.year, r.disease);
    if (const auto it = seen.find(key); it != seen.end()) {
      throw InputError(ctx + ": duplicate of row " + std::to_string(it->second) + " (area " +
                       std::to_string(r.area) + ", year " + std::to_string(r.year) + ", " +
                       std::string(to_string(r.disease)) + ")");
    }
    seen.emplace(key, row);
    records.push_back(r);
  }
  if (records.empty()) throw InputError(source + ": no data rows");

  int max_area = 0;
  int first_year = records.front().year;
  int last_year = first_year;
  for (const auto& r : records) {
    max_area = std::max(max_area, r.area);
    first_year = std::min(first_year, r.year);
    last_year = std::max(last_year, r.year);
  }
  const int num_areas = max_area + 1;
  const int num_years = last_year - first_year + 1;
  const auto expected = static_cast<std::size_t>(kNumDiseases) * num_areas * num_years;
  if (records.size() != expected) {
    for (int d = 0; d < kNumDiseases; ++d) {
      for (int y = first_year; y <= last_year; ++y) {
        for (int i = 0; i < num_areas; ++i) {
          if (!seen.count({i, y, static_cast<Disease>(d)})) {
            throw InputError(source + ": no row for area " + std::to_string(i) + ", year " + std::to_string(y) +
                             ", " + std::string(to_string(static_cast<Disease>(d))));
          }
        }
      }
    }
  }

  ObservationPanel panel(num_areas, num_years, first_year);
  PanelLoadReport rep;
  rep.rows = static_cast<int>(records.size());
  for (const auto& r : records) {
    const int t = r.year - first_year;
    panel.set_population(r.area, t, r.disease, *r.population);
    if (r.count) {
      panel.set_count(r.area, t, r.disease, *r.count);
      rep.total_count[static_cast<int>(r.disease)] += *r.count;
    } else {
      panel.set_missing(r.area, t, r.disease);
      ++rep.missing_cells;
    }
  }
  if (report) *report = rep;
  return panel;
}

ObservationPanel load_panel(const std::filesystem::path& counts_path,
                            const std::optional<std::filesystem::path>& population_path, PanelLoadReport* report) {
  std::optional<PopulationTable> pops;
  if (population_path) pops = load_populations(*population_path);
  auto in = open_input(counts_path);
  return read_panel(in, pops ? &*pops : nullptr, report, counts_path.string());
}

void write_panel(std::ostream& out, const ObservationPanel& panel) {
  out << "area_id,year,disease,count,population\n";
  for (int d = 0; d < kNumDiseases; ++d) {
    const auto dis = static_cast<Disease>(d);
    for (int t = 0; t < panel.num_years(); ++t) {
      for (int i = 0; i < panel.num_areas(); ++i) {
        const auto c = panel.count(i, t, dis);
        out << i << ',' << panel.first_year() + t << ',' << to_string(dis) << ','
            << (c ? std::to_string(*c) : std::string()) << ',' << format_number(panel.population(i, t, dis))
            << '\n';
      }
    }
  }
}

void write_truth(std::ostream& out, const SimulationTruth& truth, int first_year) {
  const LatentLayout& layout = *truth.layout;
  out << "kind,name,index,value\n";
  for (const auto& id : layout.hypers()) {
    out << "hyper," << id.name() << ",," << format_number(hyper_value(truth.hyper, id)) << '\n';
  }
  for (const auto& b : layout.blocks()) {
    for (int k = 0; k < b.length; ++k) {
      out << "latent," << to_string(b.label) << ',' << k << ',' << format_number(truth.field(b.offset + k)) << '\n';
    }
  }
  const int a = layout.num_areas();
  for (int d = 0; d < kNumDiseases; ++d) {
    for (int t = 0; t < layout.num_years(); ++t) {
      for (int i = 0; i < a; ++i) {
        const auto dis = static_cast<Disease>(d);
        out << "rate," << to_string(dis) << ',' << i << ':' << first_year + t << ','
            << format_number(truth.rate(i, t, dis)) << '\n';
      }
    }
  }
}

}  // namespace scm
