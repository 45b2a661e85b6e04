#pragma once

// Minimal SVG line plots and heat maps for the CLI figures.

#include <string>
#include <vector>

namespace levisim::cli {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  bool markers = false;
};

struct LinePlot {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool logx = false;
  bool logy = false;
  std::vector<Series> series;

  std::string render() const;
};

/// values[i][j] is the cell at x[i], y[j]; colour scale is linear in value.
struct HeatMap {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<std::vector<double>> values;

  std::string render() const;
};

}  // namespace levisim::cli
