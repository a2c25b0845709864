#ifndef QAT_REPRODUCE_HPP
#define QAT_REPRODUCE_HPP

#include "qat/simulator.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qat::repro {

/// In-memory CSV table. Cells are preformatted strings.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string to_csv() const;
};

std::string fmt(double v);

struct Options {
  double scale = 1.0;        // multiplies default trial counts, in (0, 1]
  int trials = 0;            // overrides the scaled default when > 0
  std::uint64_t seed = 20240101;
  int jobs = 1;
  FitConfig fit;
};

/// File name -> table; written side by side into the output directory.
using Bundle = std::map<std::string, Table>;

const std::vector<std::string>& figure_ids();

/// Log grid of 13 points on [1e-3, 1] plus 0.2, ascending.
std::vector<double> eta_grid();

/// Isotropic scenario behind the selection sweep and the steering-bias study.
SimConfig isotropic_scenario(double eta, double eps_sd, std::uint64_t seed);
/// Random-state scenario with analyser errors and dark counts on.
SimConfig ginibre_scenario(std::uint64_t seed);

/// Number of trials for a figure given its full-size default.
int trial_count(int full, const Options& opt);

/// Distinct seed per grid point so points do not share draws.
std::uint64_t point_seed(std::uint64_t master, int point);

Bundle fig1(const Options& opt);
Bundle fig2(const Options& opt);
Bundle fig3(const Options& opt);
Bundle figS3(const Options& opt);
Bundle figS4(const Options& opt);

/// Dispatch on figure id; throws std::invalid_argument for unknown ids.
Bundle reproduce(const std::string& id, const Options& opt);

/// Fidelity between lossy isotropic assemblages at visibility nu and at 1.
double insensitivity_fidelity(double nu, double eps);

/// Per-(trial, model) rows shared by the Monte Carlo figures.
void append_records(Table& t, const std::vector<std::string>& prefix, const MonteCarloResult& res);
Table record_table(const std::vector<std::string>& prefix_cols);

}  // namespace qat::repro

#endif  // QAT_REPRODUCE_HPP
