#include "scm/io.hpp"
#include "scm/simulate.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace scm {
namespace {

const char* kEightRows =
    "area_id,year,disease,count,population\n"
    "0,2001,incidence,5,1000\n"
    "1,2001,incidence,6,1100\n"
    "0,2002,incidence,7,1000\n"
    "1,2002,incidence,,1100\n"
    "0,2001,mortality,2,1000\n"
    "1,2001,mortality,3,1100\n"
    "0,2002,mortality,4,1000\n"
    "1,2002,mortality,1,1100\n";

TEST(ReadPanel, DimensionsAndMissingCells) {
  std::istringstream in(kEightRows);
  PanelLoadReport rep;
  const ObservationPanel p = read_panel(in, nullptr, &rep);
  EXPECT_EQ(p.num_areas(), 2);
  EXPECT_EQ(p.num_years(), 2);
  EXPECT_EQ(p.num_cells(), 8);
  EXPECT_EQ(p.first_year(), 2001);
  EXPECT_EQ(rep.rows, 8);
  EXPECT_EQ(rep.missing_cells, 1);
  EXPECT_EQ(rep.total_count[0], 18);
  EXPECT_FALSE(p.count(1, 1, Disease::Incidence));
  EXPECT_EQ(*p.count(0, 1, Disease::Incidence), 7);
  EXPECT_EQ(p.population(1, 0, Disease::Mortality), 1100.0);
}

std::string replace_line(int line, const std::string& text) {
  std::istringstream in(kEightRows);
  std::ostringstream out;
  std::string l;
  for (int k = 1; std::getline(in, l); ++k) out << (k == line ? text : l) << '\n';
  return out.str();
}

void expect_error(const std::string& csv, const std::string& fragment) {
  std::istringstream in(csv);
  try {
    read_panel(in);
    FAIL() << "expected InputError containing " << fragment;
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

TEST(ReadPanel, Rejections) {
  expect_error(replace_line(9, "0,2001,incidence,8,1000"), "row 9: duplicate of row 2");
  expect_error(replace_line(3, "1,2001,incidence,-1,1100"), "negative count");
  expect_error(replace_line(3, "1,2001,incidence,6,"), "missing population");
  expect_error(replace_line(3, "1,2001,cancer,6,1100"), "unknown disease");
  expect_error(replace_line(9, "# dropped"), "no row for area 1, year 2002, mortality");
  expect_error("area_id,year\n", "expected columns");
  expect_error("", "empty");
}

TEST(ReadPanel, PopulationsFromSeparateTable) {
  std::istringstream pops(
      "area_id,year,disease,population\n"
      "0,2001,incidence,50\n0,2001,mortality,60\n");
  const PopulationTable table = read_populations(pops);
  std::istringstream counts("area_id,year,disease,count\n0,2001,incidence,1\n0,2001,mortality,2\n");
  const ObservationPanel p = read_panel(counts, &table);
  EXPECT_EQ(p.population(0, 0, Disease::Incidence), 50.0);
  EXPECT_EQ(p.population(0, 0, Disease::Mortality), 60.0);
  const auto proj = projection_from(table);
  EXPECT_EQ(proj(0, 2001, Disease::Mortality), 60.0);
  EXPECT_FALSE(proj(0, 2002, Disease::Mortality));
}

TEST(WritePanel, RoundTrip) {
  ModelConfig cfg;
  const AreaGraph g = grid_graph(2, 2);
  const LatentLayout layout(cfg, g, 3);
  SimulationOptions o;
  o.first_year = 1999;
  auto [panel, truth] = simulate(cfg, g, 3, 12345.5, default_hyper(layout), 8, o);
  panel.set_missing(2, 1, Disease::Incidence);
  std::ostringstream out;
  write_panel(out, panel);
  std::istringstream in(out.str());
  EXPECT_EQ(read_panel(in), panel);

  const auto dir = std::filesystem::temp_directory_path() / "scm_io_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream f(dir / "panel.csv");
    write_panel(f, panel);
  }
  EXPECT_EQ(load_panel(dir / "panel.csv"), panel);
  EXPECT_THROW(load_panel(dir / "absent.csv"), InputError);
  std::filesystem::remove_all(dir);

  std::ostringstream t;
  write_truth(t, truth, 1999);
  EXPECT_EQ(t.str().rfind("kind,name,index,value\n", 0), 0u);
  EXPECT_NE(t.str().find("rate,incidence,0:1999,"), std::string::npos);
}

}  // namespace
}  // namespace scm
