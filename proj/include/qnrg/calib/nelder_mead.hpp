#pragma once

#include <functional>
#include <vector>

namespace qnrg::calib {

struct SimplexConfig {
    std::vector<double> initial_step;  // per dimension; scalar fallback below
    double default_step = 0.1;         // used when initial_step is empty/short
    double tol_objective = 1e-12;      // spread of simplex values
    double tol_diameter = 1e-12;       // max vertex distance
    int max_iterations = 20000;

    void validate() const;
};

struct SimplexResult {
    std::vector<double> argmin;
    double value = 0.0;
    bool converged = false;
    int iterations = 0;
};

using Objective = std::function<double(const std::vector<double>&)>;

// Downhill simplex with the standard coefficients (reflect 1, expand 2,
// contract 0.5, shrink 0.5). Converges when both the simplex diameter and
// the objective spread drop below their tolerances. NaN objective values
// abort the search.
SimplexResult nelder_mead(const Objective& objective, const std::vector<double>& start,
                          const SimplexConfig& cfg);

}  // namespace qnrg::calib
