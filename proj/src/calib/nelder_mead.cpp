#include "qnrg/calib/nelder_mead.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qnrg/errors.hpp"

namespace qnrg::calib {

void SimplexConfig::validate() const {
    if (!(tol_objective > 0.0) || !(tol_diameter > 0.0))
        throw DomainError("simplex config: tolerances must be > 0");
    if (max_iterations < 1) throw DomainError("simplex config: max_iterations must be >= 1");
}

namespace {

double checked_eval(const Objective& f, const std::vector<double>& x) {
    double v = f(x);
    if (std::isnan(v)) {
        std::string where = "(";
        for (size_t i = 0; i < x.size(); ++i)
            where += (i ? "," : "") + std::to_string(x[i]);
        throw DomainError("nelder_mead: objective returned NaN at " + where + ")");
    }
    return v;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

SimplexResult nelder_mead(const Objective& objective, const std::vector<double>& start,
                          const SimplexConfig& cfg) {
    cfg.validate();
    const size_t dim = start.size();
    if (dim == 0) throw DomainError("nelder_mead: empty start vector");

    // Simplex of dim+1 vertices: start plus one step along each axis.
    std::vector<std::vector<double>> vertex(dim + 1, start);
    for (size_t i = 0; i < dim; ++i) {
        double step = i < cfg.initial_step.size() ? cfg.initial_step[i] : cfg.default_step;
        if (step == 0.0) step = cfg.default_step;
        vertex[i + 1][i] += step;
    }
    std::vector<double> value(dim + 1);
    for (size_t i = 0; i <= dim; ++i) value[i] = checked_eval(objective, vertex[i]);

    std::vector<size_t> order(dim + 1);
    SimplexResult res;
    for (res.iterations = 0; res.iterations < cfg.max_iterations; ++res.iterations) {
        std::iota(order.begin(), order.end(), size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](size_t a, size_t b) { return value[a] < value[b]; });
        size_t best = order[0], worst = order[dim], second_worst = order[dim - 1];

        double spread = value[worst] - value[best];
        double diameter = 0.0;
        for (size_t i = 1; i <= dim; ++i)
            diameter = std::max(diameter, distance(vertex[order[i]], vertex[best]));
        if (spread <= cfg.tol_objective && diameter <= cfg.tol_diameter) {
            res.converged = true;
            break;
        }

        std::vector<double> centroid(dim, 0.0);
        for (size_t i = 0; i <= dim; ++i) {
            if (i == worst) continue;
            for (size_t d = 0; d < dim; ++d) centroid[d] += vertex[i][d];
        }
        for (double& c : centroid) c /= static_cast<double>(dim);

        auto blend = [&](double coeff) {
            std::vector<double> x(dim);
            for (size_t d = 0; d < dim; ++d)
                x[d] = centroid[d] + coeff * (vertex[worst][d] - centroid[d]);
            return x;
        };

        std::vector<double> reflected = blend(-1.0);
        double f_reflected = checked_eval(objective, reflected);

        if (f_reflected < value[best]) {
            std::vector<double> expanded = blend(-2.0);
            double f_expanded = checked_eval(objective, expanded);
            if (f_expanded < f_reflected) {
                vertex[worst] = std::move(expanded);
                value[worst] = f_expanded;
            } else {
                vertex[worst] = std::move(reflected);
                value[worst] = f_reflected;
            }
        } else if (f_reflected < value[second_worst]) {
            vertex[worst] = std::move(reflected);
            value[worst] = f_reflected;
        } else {
            bool outside = f_reflected < value[worst];
            std::vector<double> contracted = blend(outside ? -0.5 : 0.5);
            double f_contracted = checked_eval(objective, contracted);
            if (f_contracted < std::min(f_reflected, value[worst])) {
                vertex[worst] = std::move(contracted);
                value[worst] = f_contracted;
            } else {
                // Shrink everything toward the best vertex.
                for (size_t i = 0; i <= dim; ++i) {
                    if (i == best) continue;
                    for (size_t d = 0; d < dim; ++d)
                        vertex[i][d] = vertex[best][d] + 0.5 * (vertex[i][d] - vertex[best][d]);
                    value[i] = checked_eval(objective, vertex[i]);
                }
            }
        }
    }

    size_t best = 0;
    for (size_t i = 1; i <= dim; ++i)
        if (value[i] < value[best]) best = i;
    res.argmin = vertex[best];
    res.value = value[best];
    return res;
}

}  // namespace qnrg::calib
