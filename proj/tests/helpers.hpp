// Shared fixtures for the test binaries.
#pragma once

#include <filesystem>
#include <fstream>
#include <string>

#include "extcomp/dataset.hpp"

namespace testutil {

inline std::string write_temp_file(const std::string& name,
                                   const std::string& content) {
  auto dir = std::filesystem::temp_directory_path() / "extcomp_tests";
  std::filesystem::create_directories(dir);
  auto path = dir / name;
  std::ofstream out(path);
  out << content;
  return path.string();
}

// Two-source dataset with one binary covariate, exact and tiny.
inline extcomp::CompositeDataset tiny_dataset() {
  extcomp::CompositeDataset data;
  data.schema.x_cols = {{"x_1", true}};
  data.treatment_sets = {{1, {0, 1}}, {0, {0, 2}}};
  auto add = [&](int s, double x, int a, double y) {
    extcomp::ObservationRecord r;
    r.s = s;
    r.x = {x};
    r.a = a;
    r.y = y;
    data.records.push_back(r);
  };
  add(1, 0, 1, 1); add(1, 0, 1, 0); add(1, 0, 0, 0); add(1, 1, 1, 1);
  add(1, 1, 0, 0); add(0, 0, 0, 0); add(0, 0, 2, 1); add(0, 1, 2, 0);
  add(0, 1, 0, 1);
  return data;
}

}  // namespace testutil
