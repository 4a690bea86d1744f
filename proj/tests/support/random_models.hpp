#pragma once

// Random MILP/LP instance generators used by the unit and acceptance suites.
// Instances are built around a known feasible point so feasibility is
// guaranteed by construction.

#include <random>

#include "lfcm/milp.hpp"

namespace lfcm::testsupport {

struct RandomMilp {
    milp::Model model;
    std::vector<double> feasible_point;
};

inline RandomMilp make_random_milp(std::mt19937& rng, int n_binary, int n_continuous,
                                   int n_rows = 6) {
    using namespace lfcm::milp;
    RandomMilp out;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::uniform_real_distribution<double> coef(-1.0, 1.0);

    std::vector<VarRef> vars;
    std::vector<double> x0;
    for (int j = 0; j < n_binary; ++j) {
        vars.push_back(out.model.add_variable(0, 1, true, "b" + std::to_string(j)));
        x0.push_back(unit(rng) < 0.5 ? 0.0 : 1.0);
    }
    for (int j = 0; j < n_continuous; ++j) {
        const double lo = -2.0 * unit(rng);
        const double hi = lo + 1.0 + 2.0 * unit(rng);
        vars.push_back(out.model.add_variable(lo, hi, false, "x" + std::to_string(j)));
        x0.push_back(lo + (hi - lo) * unit(rng));
    }

    for (int i = 0; i < n_rows; ++i) {
        LinExpr row;
        double lhs0 = 0.0;
        for (std::size_t j = 0; j < vars.size(); ++j) {
            if (unit(rng) < 0.4) continue;
            const double a = coef(rng);
            row.add(vars[j], a);
            lhs0 += a * x0[j];
        }
        if (row.terms.empty()) {
            row.add(vars[0], 1.0);
            lhs0 += x0[0];
        }
        const double margin = unit(rng);
        if (unit(rng) < 0.5)
            out.model.add_constraint(row, Sense::LessEqual, lhs0 + margin);
        else
            out.model.add_constraint(row, Sense::GreaterEqual, lhs0 - margin);
    }

    LinExpr obj;
    for (const auto& v : vars) obj.add(v, coef(rng));
    out.model.set_objective(obj);
    out.feasible_point = std::move(x0);
    return out;
}

inline milp::Model make_random_lp(std::mt19937& rng, int n_vars = 6, int n_rows = 5) {
    RandomMilp r = make_random_milp(rng, 0, n_vars, n_rows);
    return std::move(r.model);
}

}  // namespace lfcm::testsupport
