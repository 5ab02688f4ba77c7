#ifndef UCL_EXPERIMENTS_HPP
#define UCL_EXPERIMENTS_HPP

#include "ucl/config.hpp"
#include "ucl/report.hpp"
#include "ucl/wolff.hpp"

namespace ucl {

// Dispatches a validated configuration to the named experiment and returns
// its report.  Deterministic given (config, seed): every random draw goes
// through a generator seeded from the config.
ReportBundle run_experiment(const ExperimentConfig& cfg);

// Text measure format: one point per line, "x1 ... xd logweight";
// blank lines and '#' comments skipped.
DiscreteMeasure load_measure_file(const std::string& path);

// Seeded synthetic cloud in the left half space used when no measure file is
// given: npts points, x1 in (-1.6, -0.4), transverse in (-1, 1)^{d-1},
// log weights uniform in (-1, 1).
DiscreteMeasure synth_measure(int npts, std::uint64_t seed, int d = 3);

} // namespace ucl

#endif
