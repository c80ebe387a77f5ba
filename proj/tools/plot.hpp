#pragma once

#include <string>

namespace cutpinn::plot {

struct PlotOptions {
  std::string input;   // CSV path
  std::string output;  // SVG path
  std::string kind = "line";  // line | heat
  std::string x_col = "x";
  std::string y_col = "y";
  std::string series_col;  // optional grouping column for line plots
  std::string value_col;   // heat-map value column
  bool log_x = false;
  bool log_y = false;
  std::string title;
};

// Renders a CSV as a simple standalone SVG. Throws std::runtime_error on
// malformed inputs or missing columns.
void render(const PlotOptions& opt);

}  // namespace cutpinn::plot
