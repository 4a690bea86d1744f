#include "lfcm/milp.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <map>
#include <queue>
#include <sstream>

namespace lfcm::milp {

namespace {

std::atomic<std::uint32_t> g_next_model_id{1};

constexpr double kPivotTol = 1e-9;
constexpr double kCostTol = 1e-9;
constexpr double kTieTol = 1e-12;
constexpr int kDegenerateLimit = 200;

enum class ColStatus : std::uint8_t { AtLower, AtUpper, Basic, FreeZero };

/// Model recast as equalities with one slack column per row, rows scaled to
/// max-|coefficient| 1. Structural variable bounds are supplied per solve so
/// branch-and-bound nodes can override them.
struct Standardized {
    int m = 0;
    int n_struct = 0;
    std::vector<std::vector<std::pair<int, double>>> rows;  // scaled structural coefficients
    std::vector<double> rhs;                                 // scaled
    std::vector<double> slack_lo, slack_up;                  // slack bounds per row
    std::vector<double> cost;                                // structural objective coefficients
    double cost_constant = 0.0;
};

Standardized standardize(const Model& model) {
    Standardized s;
    s.m = model.num_constraints();
    s.n_struct = model.num_variables();
    s.rows.resize(s.m);
    s.rhs.resize(s.m);
    s.slack_lo.resize(s.m);
    s.slack_up.resize(s.m);
    for (int i = 0; i < s.m; ++i) {
        const Constraint& c = model.constraint(i);
        double scale = 1.0;
        for (const auto& [j, a] : c.coeffs) scale = std::max(scale, std::fabs(a));
        if (std::fabs(c.rhs) > scale) scale = std::fabs(c.rhs);
        const double inv = 1.0 / scale;
        s.rows[i].reserve(c.coeffs.size());
        for (const auto& [j, a] : c.coeffs)
            if (a != 0.0) s.rows[i].emplace_back(j, a * inv);
        s.rhs[i] = c.rhs * inv;
        switch (c.sense) {
            case Sense::LessEqual:
                s.slack_lo[i] = 0.0;
                s.slack_up[i] = kInf;
                break;
            case Sense::Equal:
                s.slack_lo[i] = 0.0;
                s.slack_up[i] = 0.0;
                break;
            case Sense::GreaterEqual:
                s.slack_lo[i] = -kInf;
                s.slack_up[i] = 0.0;
                break;
        }
    }
    s.cost.assign(s.n_struct, 0.0);
    for (const auto& [j, c] : model.objective_coeffs()) s.cost[j] += c;
    s.cost_constant = model.objective_constant();
    return s;
}

struct LpResult {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;   // includes the model's objective constant
    double dual_objective = 0.0;
    std::vector<double> x;    // structural values
    long iterations = 0;
};

/// Bounded-variable primal simplex on a dense tableau. Phase 1 starts from a
/// slack basis with artificial columns covering rows whose slack cannot absorb
/// the initial residual; phase 2 optimizes the true objective. Deterministic:
/// Dantzig pricing, ties by lowest column index, Bland's rule after a run of
/// degenerate pivots.
class Simplex {
public:
    Simplex(const Standardized& s, const std::vector<double>& lo, const std::vector<double>& up,
            long iteration_limit)
        : s_(s), m_(s.m), n_struct_(s.n_struct), iter_limit_(iteration_limit) {
        n_cols_ = n_struct_ + m_;  // artificials appended on demand
        lo_.assign(lo.begin(), lo.end());
        up_.assign(up.begin(), up.end());
        lo_.resize(n_cols_);
        up_.resize(n_cols_);
        for (int i = 0; i < m_; ++i) {
            lo_[n_struct_ + i] = s.slack_lo[i];
            up_[n_struct_ + i] = s.slack_up[i];
        }
    }

    LpResult run() {
        LpResult out;
        for (int j = 0; j < n_struct_; ++j) {
            if (lo_[j] > up_[j] + 1e-12) {
                out.status = SolveStatus::Infeasible;
                return out;
            }
        }
        build_initial_basis();
        if (!artificial_rows_.empty()) {
            phase_ = 1;
            const SolveStatus st = iterate();
            out.iterations = iters_;
            if (st != SolveStatus::Optimal) {
                out.status = st;
                return out;
            }
            double infeas = 0.0;
            for (int i = 0; i < m_; ++i)
                if (basis_[i] >= n_struct_ + m_) infeas += std::fabs(xb_[i]);
            if (infeas > 1e-7) {
                out.status = SolveStatus::Infeasible;
                out.iterations = iters_;
                return out;
            }
            expel_artificials();
        }
        phase_ = 2;
        load_costs();
        const SolveStatus st = iterate();
        out.iterations = iters_;
        out.status = st;
        if (st != SolveStatus::Optimal) return out;
        refine();
        out.x.assign(n_struct_, 0.0);
        for (int j = 0; j < n_struct_; ++j) out.x[j] = value(j);
        out.objective = s_.cost_constant;
        for (int j = 0; j < n_struct_; ++j) out.objective += s_.cost[j] * out.x[j];
        out.dual_objective = dual_objective();
        return out;
    }

private:
    double value(int j) const {
        switch (stat_[j]) {
            case ColStatus::Basic: return xb_[row_of_[j]];
            case ColStatus::AtLower: return lo_[j];
            case ColStatus::AtUpper: return up_[j];
            case ColStatus::FreeZero: return 0.0;
        }
        return 0.0;
    }

    void build_initial_basis() {
        a_.assign(static_cast<std::size_t>(m_) * n_cols_, 0.0);
        for (int i = 0; i < m_; ++i) {
            for (const auto& [j, v] : s_.rows[i]) a_[idx(i, j)] = v;
            a_[idx(i, n_struct_ + i)] = 1.0;
        }
        stat_.assign(n_cols_, ColStatus::AtLower);
        for (int j = 0; j < n_cols_; ++j) {
            if (std::isfinite(lo_[j]))
                stat_[j] = ColStatus::AtLower;
            else if (std::isfinite(up_[j]))
                stat_[j] = ColStatus::AtUpper;
            else
                stat_[j] = ColStatus::FreeZero;
        }
        basis_.assign(m_, -1);
        xb_.assign(m_, 0.0);
        row_of_.assign(n_cols_, -1);

        std::vector<double> residual(m_, 0.0);
        for (int i = 0; i < m_; ++i) {
            double r = s_.rhs[i];
            for (const auto& [j, v] : s_.rows[i]) r -= v * value(j);
            residual[i] = r;
        }
        std::vector<int> needs_artificial;
        for (int i = 0; i < m_; ++i) {
            const int scol = n_struct_ + i;
            if (residual[i] >= lo_[scol] - 1e-12 && residual[i] <= up_[scol] + 1e-12) {
                basis_[i] = scol;
                stat_[scol] = ColStatus::Basic;
                row_of_[scol] = i;
                xb_[i] = std::clamp(residual[i], lo_[scol], up_[scol]);
            } else {
                needs_artificial.push_back(i);
            }
        }
        artificial_rows_ = needs_artificial;
        if (needs_artificial.empty()) return;

        const int n_art = static_cast<int>(needs_artificial.size());
        const int old_cols = n_cols_;
        n_cols_ += n_art;
        std::vector<double> wide(static_cast<std::size_t>(m_) * n_cols_, 0.0);
        for (int i = 0; i < m_; ++i)
            std::copy_n(a_.begin() + static_cast<std::size_t>(i) * old_cols, old_cols,
                        wide.begin() + static_cast<std::size_t>(i) * n_cols_);
        a_ = std::move(wide);
        lo_.resize(n_cols_, 0.0);
        up_.resize(n_cols_, kInf);
        stat_.resize(n_cols_, ColStatus::AtLower);
        row_of_.resize(n_cols_, -1);

        for (int k = 0; k < n_art; ++k) {
            const int i = needs_artificial[k];
            const int scol = n_struct_ + i;
            const int acol = old_cols + k;
            // Peg the slack at the bound nearest the residual, cover the rest
            // with the artificial. The row is sign-normalized so the basis
            // column is +1.
            double pegged;
            if (residual[i] < lo_[scol]) {
                pegged = lo_[scol];
                stat_[scol] = ColStatus::AtLower;
            } else {
                pegged = up_[scol];
                stat_[scol] = ColStatus::AtUpper;
            }
            const double gap = residual[i] - pegged;
            const double sigma = gap >= 0 ? 1.0 : -1.0;
            a_[idx(i, acol)] = sigma;
            if (sigma < 0)
                for (int j = 0; j < n_cols_; ++j) a_[idx(i, j)] = -a_[idx(i, j)];
            basis_[i] = acol;
            stat_[acol] = ColStatus::Basic;
            row_of_[acol] = i;
            xb_[i] = std::fabs(gap);
        }
        // Phase-1 objective: minimize the sum of artificial values.
        zrow_.assign(n_cols_, 0.0);
        for (int k = 0; k < n_art; ++k) {
            const int i = needs_artificial[k];
            for (int j = 0; j < n_cols_; ++j) zrow_[j] -= a_[idx(i, j)];
        }
        for (int i = 0; i < m_; ++i) zrow_[basis_[i]] = 0.0;
    }

    void load_costs() {
        zrow_.assign(n_cols_, 0.0);
        for (int j = 0; j < n_struct_; ++j) zrow_[j] = s_.cost[j];
        for (int i = 0; i < m_; ++i) {
            const int b = basis_[i];
            const double cb = b < n_struct_ ? s_.cost[b] : 0.0;
            if (cb == 0.0) continue;
            for (int j = 0; j < n_cols_; ++j) zrow_[j] -= cb * a_[idx(i, j)];
        }
        for (int i = 0; i < m_; ++i) zrow_[basis_[i]] = 0.0;
    }

    /// After phase 1: pivot zero-valued artificials out of the basis where a
    /// non-artificial column is available, then freeze every artificial at 0.
    void expel_artificials() {
        const int art_begin = n_struct_ + m_;
        for (int i = 0; i < m_; ++i) {
            if (basis_[i] < art_begin) continue;
            int enter = -1;
            for (int j = 0; j < art_begin; ++j) {
                if (stat_[j] == ColStatus::Basic) continue;
                if (std::fabs(a_[idx(i, j)]) > 1e-7) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) continue;  // redundant row; artificial stays basic at 0
            const int leaving = basis_[i];
            const double entering_value = value(enter);
            stat_[leaving] = ColStatus::AtLower;
            row_of_[leaving] = -1;
            pivot(i, enter, entering_value);
        }
        for (int j = art_begin; j < n_cols_; ++j) {
            lo_[j] = 0.0;
            up_[j] = 0.0;
            if (stat_[j] != ColStatus::Basic) stat_[j] = ColStatus::AtLower;
        }
    }

    SolveStatus iterate() {
        int degenerate_streak = 0;
        bool bland = false;
        while (true) {
            if (iters_ >= iter_limit_) return SolveStatus::IterationLimit;

            int q = -1;
            double best_score = kCostTol;
            int dir = 0;
            for (int j = 0; j < n_cols_; ++j) {
                if (stat_[j] == ColStatus::Basic) continue;
                if (lo_[j] == up_[j]) continue;  // fixed: cannot move
                const double d = zrow_[j];
                double score = 0.0;
                int cand_dir = 0;
                if (stat_[j] == ColStatus::AtLower && d < -kCostTol) {
                    score = -d;
                    cand_dir = +1;
                } else if (stat_[j] == ColStatus::AtUpper && d > kCostTol) {
                    score = d;
                    cand_dir = -1;
                } else if (stat_[j] == ColStatus::FreeZero && std::fabs(d) > kCostTol) {
                    score = std::fabs(d);
                    cand_dir = d < 0 ? +1 : -1;
                } else {
                    continue;
                }
                if (bland) {
                    q = j;
                    dir = cand_dir;
                    break;
                }
                if (score > best_score + kTieTol) {
                    best_score = score;
                    q = j;
                    dir = cand_dir;
                }
            }
            if (q < 0) return SolveStatus::Optimal;

            // Ratio test: how far the entering variable can move.
            double t_limit = kInf;
            if (stat_[q] != ColStatus::FreeZero && std::isfinite(lo_[q]) && std::isfinite(up_[q]))
                t_limit = up_[q] - lo_[q];
            double best_t = t_limit;
            int leave_row = -1;
            double leave_pivot = 0.0;
            bool leave_to_upper = false;
            for (int i = 0; i < m_; ++i) {
                const double g = a_[idx(i, q)];
                if (std::fabs(g) <= kPivotTol) continue;
                const double rate = -dir * g;  // d(basic_i)/dt
                const int k = basis_[i];
                double t_i;
                bool to_upper;
                if (rate > 0) {
                    if (!std::isfinite(up_[k])) continue;
                    t_i = (up_[k] - xb_[i]) / rate;
                    to_upper = true;
                } else {
                    if (!std::isfinite(lo_[k])) continue;
                    t_i = (lo_[k] - xb_[i]) / rate;
                    to_upper = false;
                }
                if (t_i < 0) t_i = 0;
                const bool better =
                    t_i < best_t - kTieTol ||
                    (leave_row >= 0 && std::fabs(t_i - best_t) <= kTieTol &&
                     (std::fabs(g) > std::fabs(leave_pivot) + kTieTol ||
                      (std::fabs(std::fabs(g) - std::fabs(leave_pivot)) <= kTieTol &&
                       basis_[i] < basis_[leave_row])));
                if (leave_row < 0 && t_i <= best_t) {
                    best_t = t_i;
                    leave_row = i;
                    leave_pivot = g;
                    leave_to_upper = to_upper;
                } else if (better) {
                    best_t = t_i;
                    leave_row = i;
                    leave_pivot = g;
                    leave_to_upper = to_upper;
                }
            }
            ++iters_;
            if (leave_row < 0) {
                if (!std::isfinite(best_t)) return SolveStatus::Unbounded;
                // Bound flip: the entering variable travels to its other bound.
                for (int i = 0; i < m_; ++i) xb_[i] -= dir * a_[idx(i, q)] * best_t;
                stat_[q] = stat_[q] == ColStatus::AtLower ? ColStatus::AtUpper : ColStatus::AtLower;
            } else {
                const double xq = value(q) + dir * best_t;
                for (int i = 0; i < m_; ++i)
                    if (i != leave_row) xb_[i] -= dir * a_[idx(i, q)] * best_t;
                const int k = basis_[leave_row];
                stat_[k] = leave_to_upper ? ColStatus::AtUpper : ColStatus::AtLower;
                row_of_[k] = -1;
                pivot(leave_row, q, xq);
            }
            if (best_t <= 1e-10) {
                if (++degenerate_streak > kDegenerateLimit) bland = true;
            } else {
                degenerate_streak = 0;
                bland = false;
            }
        }
    }

    void pivot(int r, int q, double entering_value) {
        double* rowr = &a_[idx(r, 0)];
        const double piv = rowr[q];
        const double inv = 1.0 / piv;
        for (int j = 0; j < n_cols_; ++j) rowr[j] *= inv;
        rowr[q] = 1.0;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            double* rowi = &a_[idx(i, 0)];
            const double f = rowi[q];
            if (f == 0.0) continue;
            for (int j = 0; j < n_cols_; ++j) rowi[j] -= f * rowr[j];
            rowi[q] = 0.0;
        }
        if (!zrow_.empty()) {
            const double f = zrow_[q];
            if (f != 0.0) {
                for (int j = 0; j < n_cols_; ++j) zrow_[j] -= f * rowr[j];
                zrow_[q] = 0.0;
            }
        }
        basis_[r] = q;
        stat_[q] = ColStatus::Basic;
        row_of_[q] = r;
        xb_[r] = entering_value;
    }

    /// One pass of residual cleanup: recompute the basic values from the
    /// original (scaled) row data by LU-solving B x_B = b - N x_N. Counters
    /// the drift accumulated over many tableau pivots.
    void refine() {
        std::vector<double> rhs(m_);
        for (int i = 0; i < m_; ++i) {
            double r = s_.rhs[i];
            for (const auto& [j, v] : s_.rows[i])
                if (stat_[j] != ColStatus::Basic) r -= v * value(j);
            const int scol = n_struct_ + i;
            if (stat_[scol] != ColStatus::Basic) r -= value(scol);
            rhs[i] = r;
        }
        // Column k of B is the original column of basis_[k].
        std::vector<double> B(static_cast<std::size_t>(m_) * m_, 0.0);
        for (int k = 0; k < m_; ++k) {
            const int j = basis_[k];
            if (j < n_struct_) {
                for (int i = 0; i < m_; ++i) {
                    for (const auto& [jj, v] : s_.rows[i])
                        if (jj == j) B[static_cast<std::size_t>(i) * m_ + k] = v;
                }
            } else if (j < n_struct_ + m_) {
                B[static_cast<std::size_t>(j - n_struct_) * m_ + k] = 1.0;
            } else {
                // artificial at value 0: keep its unit column (row recorded at build)
                B[static_cast<std::size_t>(row_of_art(j)) * m_ + k] = 1.0;
            }
        }
        std::vector<int> perm(m_);
        if (!lu_factor(B, perm)) return;  // singular: keep tableau values
        std::vector<double> xB = rhs;
        lu_solve(B, perm, xB);
        for (int i = 0; i < m_; ++i) xb_[i] = xB[i];
    }

    int row_of_art(int j) const {
        // artificial columns were appended in artificial_rows_ order
        return artificial_rows_[static_cast<std::size_t>(j - n_struct_ - m_)];
    }

    bool lu_factor(std::vector<double>& A, std::vector<int>& perm) const {
        const int n = m_;
        for (int i = 0; i < n; ++i) perm[i] = i;
        for (int col = 0; col < n; ++col) {
            int p = col;
            double best = std::fabs(A[static_cast<std::size_t>(col) * n + col]);
            for (int i = col + 1; i < n; ++i) {
                const double v = std::fabs(A[static_cast<std::size_t>(i) * n + col]);
                if (v > best) {
                    best = v;
                    p = i;
                }
            }
            if (best < 1e-13) return false;
            if (p != col) {
                for (int j = 0; j < n; ++j)
                    std::swap(A[static_cast<std::size_t>(p) * n + j],
                              A[static_cast<std::size_t>(col) * n + j]);
                std::swap(perm[p], perm[col]);
            }
            const double inv = 1.0 / A[static_cast<std::size_t>(col) * n + col];
            for (int i = col + 1; i < n; ++i) {
                const double f = A[static_cast<std::size_t>(i) * n + col] * inv;
                A[static_cast<std::size_t>(i) * n + col] = f;
                if (f == 0.0) continue;
                for (int j = col + 1; j < n; ++j)
                    A[static_cast<std::size_t>(i) * n + j] -=
                        f * A[static_cast<std::size_t>(col) * n + j];
            }
        }
        return true;
    }

    void lu_solve(const std::vector<double>& A, const std::vector<int>& perm,
                  std::vector<double>& b) const {
        const int n = m_;
        std::vector<double> x(n);
        for (int i = 0; i < n; ++i) x[i] = b[perm[i]];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] -= A[static_cast<std::size_t>(i) * n + j] * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] -= A[static_cast<std::size_t>(i) * n + j] * x[j];
            x[i] /= A[static_cast<std::size_t>(i) * n + i];
        }
        b = x;
    }

    /// Lagrangian bound from the final basis; equals the primal objective at
    /// optimality and provides the duality spot-check surface.
    double dual_objective() const {
        // y_i = c_B B^{-1} e_i, read from the z-row under the slack columns.
        double g = s_.cost_constant;
        for (int i = 0; i < m_; ++i) g += -zrow_[n_struct_ + i] * s_.rhs[i];
        for (int j = 0; j < n_struct_; ++j) {
            if (stat_[j] == ColStatus::Basic || stat_[j] == ColStatus::FreeZero) continue;
            g += zrow_[j] * (stat_[j] == ColStatus::AtLower ? lo_[j] : up_[j]);
        }
        return g;
    }

    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * n_cols_ + j; }

    const Standardized& s_;
    int m_;
    int n_struct_;
    int n_cols_;
    long iter_limit_;
    long iters_ = 0;
    int phase_ = 2;
    std::vector<double> a_;
    std::vector<double> lo_, up_;
    std::vector<double> zrow_;
    std::vector<double> xb_;
    std::vector<int> basis_;
    std::vector<int> row_of_;
    std::vector<ColStatus> stat_;
    std::vector<int> artificial_rows_;
};

LpResult lp_solve(const Standardized& s, const std::vector<double>& lo,
                  const std::vector<double>& up, long iteration_limit) {
    Simplex simplex(s, lo, up, iteration_limit);
    return simplex.run();
}

struct BoundSet {
    std::vector<double> lo, up;
};

BoundSet model_bounds(const Model& model, double int_tol, bool& infeasible) {
    BoundSet b;
    const int n = model.num_variables();
    b.lo.resize(n);
    b.up.resize(n);
    infeasible = false;
    for (int j = 0; j < n; ++j) {
        const Variable& v = model.variable(j);
        double lo = v.lower, up = v.upper;
        if (v.is_integer) {
            if (std::isfinite(lo)) lo = std::ceil(lo - int_tol);
            if (std::isfinite(up)) up = std::floor(up + int_tol);
            if (lo > up) infeasible = true;
        }
        b.lo[j] = lo;
        b.up[j] = up;
    }
    return b;
}

std::vector<int> integer_indices(const Model& model) {
    std::vector<int> idx;
    for (int j = 0; j < model.num_variables(); ++j)
        if (model.variable(j).is_integer) idx.push_back(j);
    return idx;
}

bool integral(const std::vector<double>& x, const std::vector<int>& ints, double tol,
              int* worst = nullptr) {
    bool ok = true;
    double worst_frac = -1.0;
    for (int j : ints) {
        const double f = std::fabs(x[j] - std::round(x[j]));
        if (f > tol) {
            ok = false;
            const double dist = std::fabs(f - 0.5);
            if (worst && (worst_frac < 0 || dist < worst_frac - 1e-15)) {
                worst_frac = dist;
                *worst = j;
            }
        }
    }
    return ok;
}

std::string fmt9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

}  // namespace

Model::Model() : id_(g_next_model_id.fetch_add(1)) {}

VarRef Model::add_variable(double lower, double upper, bool is_integer, std::string name) {
    if (std::isnan(lower) || std::isnan(upper) || lower > upper)
        throw ModelError("add_variable: inverted or invalid bounds for '" + name + "'");
    if (name.empty()) name = "v" + std::to_string(vars_.size());
    vars_.push_back(Variable{lower, upper, is_integer, std::move(name)});
    if (is_integer) ++num_integer_;
    return VarRef{id_, static_cast<int>(vars_.size()) - 1};
}

std::vector<std::pair<int, double>> Model::merge(const LinExpr& expr, double& constant_out) const {
    constant_out = expr.constant;
    std::map<int, double> acc;
    for (const auto& [v, c] : expr.terms) {
        if (v.model_id != id_ || v.index < 0 || v.index >= num_variables())
            throw ModelError("expression references a variable not registered with this model");
        acc[v.index] += c;
    }
    std::vector<std::pair<int, double>> out(acc.begin(), acc.end());
    return out;
}

int Model::add_constraint(const LinExpr& expr, Sense sense, double rhs) {
    double shift = 0.0;
    Constraint c;
    c.coeffs = merge(expr, shift);
    c.sense = sense;
    c.rhs = rhs - shift;
    cons_.push_back(std::move(c));
    return static_cast<int>(cons_.size()) - 1;
}

void Model::set_objective(const LinExpr& expr) {
    double constant = 0.0;
    obj_coeffs_ = merge(expr, constant);
    obj_constant_ = constant;
    has_objective_ = true;
}

double Model::max_violation(const std::vector<double>& x) const {
    double worst = 0.0;
    for (const Constraint& c : cons_) {
        double lhs = 0.0;
        for (const auto& [j, a] : c.coeffs) lhs += a * x.at(static_cast<std::size_t>(j));
        double v = 0.0;
        switch (c.sense) {
            case Sense::LessEqual: v = lhs - c.rhs; break;
            case Sense::GreaterEqual: v = c.rhs - lhs; break;
            case Sense::Equal: v = std::fabs(lhs - c.rhs); break;
        }
        worst = std::max(worst, v);
    }
    for (int j = 0; j < num_variables(); ++j) {
        const Variable& v = vars_[j];
        worst = std::max(worst, v.lower - x[j]);
        worst = std::max(worst, x[j] - v.upper);
        if (v.is_integer) worst = std::max(worst, std::fabs(x[j] - std::round(x[j])));
    }
    return worst;
}

double Model::objective_value(const std::vector<double>& x) const {
    double acc = obj_constant_;
    for (const auto& [j, c] : obj_coeffs_) acc += c * x.at(static_cast<std::size_t>(j));
    return acc;
}

std::string to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::IterationLimit: return "iteration-limit";
    }
    return "?";
}

namespace {

struct Node {
    double bound = 0.0;
    long id = 0;
    std::vector<double> lo, up;  // integer-variable bound overrides (full arrays)
    std::vector<double> x;       // relaxation solution

    // best-first: lowest bound wins, ties resolved by creation order
    bool operator<(const Node& other) const {
        if (bound != other.bound) return bound > other.bound;
        return id > other.id;
    }
};

/// Fix all integers at their rounded relaxation values and re-solve the LP. A
/// cheap incumbent source for models whose binaries do not enter the
/// objective (storage gates etc.), where branching alone stalls.
bool rounding_heuristic(const Standardized& s, const std::vector<int>& ints, const Node& node,
                        long iter_limit, LpResult& out) {
    std::vector<double> lo = node.lo, up = node.up;
    for (int j : ints) {
        const double r = std::round(node.x[j]);
        if (r < lo[j] - 1e-9 || r > up[j] + 1e-9) return false;
        lo[j] = up[j] = r;
    }
    out = lp_solve(s, lo, up, iter_limit);
    return out.status == SolveStatus::Optimal;
}

}  // namespace

Solution solve(const Model& model, const SolveOptions& options) {
    options.validate();
    if (!model.has_objective()) throw ModelError("solve: model has no objective");

    Solution sol;
    bool bounds_infeasible = false;
    BoundSet root = model_bounds(model, options.integrality_tol, bounds_infeasible);
    if (bounds_infeasible) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    const Standardized s = standardize(model);
    const std::vector<int> ints = integer_indices(model);

    LpResult root_lp = lp_solve(s, root.lo, root.up, options.iteration_limit);
    sol.simplex_iterations = root_lp.iterations;
    if (root_lp.status != SolveStatus::Optimal) {
        sol.status = root_lp.status;
        return sol;
    }
    if (ints.empty()) {
        sol.status = SolveStatus::Optimal;
        sol.objective = root_lp.objective;
        sol.dual_bound = root_lp.dual_objective;
        sol.values = std::move(root_lp.x);
        sol.nodes = 1;
        return sol;
    }

    std::priority_queue<Node> open;
    long next_id = 0;
    {
        Node n;
        n.bound = root_lp.objective;
        n.id = next_id++;
        n.lo = root.lo;
        n.up = root.up;
        n.x = std::move(root_lp.x);
        open.push(std::move(n));
    }

    bool have_incumbent = false;
    double best_obj = kInf;
    std::vector<double> best_x;
    double best_bound = root_lp.objective;
    long nodes = 0;
    long iters_left = options.iteration_limit - sol.simplex_iterations;
    bool budget_hit = false;

    auto gap_abs = [&](double inc) { return options.relative_gap * (1.0 + std::fabs(inc)); };

    while (!open.empty()) {
        if (nodes >= options.node_limit || iters_left <= 0) {
            budget_hit = true;
            break;
        }
        Node node = open.top();
        open.pop();
        best_bound = node.bound;
        if (have_incumbent && node.bound >= best_obj - gap_abs(best_obj)) {
            best_bound = best_obj;
            break;  // best-first: all remaining nodes are no better
        }
        ++nodes;

        int branch_var = -1;
        if (integral(node.x, ints, options.integrality_tol, &branch_var)) {
            if (node.bound < best_obj - 1e-12) {
                best_obj = node.bound;
                best_x = node.x;
                for (int j : ints) best_x[j] = std::round(best_x[j]);
                have_incumbent = true;
            }
            continue;
        }

        LpResult heur;
        if (rounding_heuristic(s, ints, node, iters_left, heur)) {
            iters_left -= heur.iterations;
            sol.simplex_iterations += heur.iterations;
            if (heur.objective < best_obj - 1e-12) {
                best_obj = heur.objective;
                best_x = std::move(heur.x);
                for (int j : ints) best_x[j] = std::round(best_x[j]);
                have_incumbent = true;
            }
        }

        for (int side = 0; side < 2; ++side) {
            Node child;
            child.lo = node.lo;
            child.up = node.up;
            const double v = node.x[branch_var];
            if (side == 0)
                child.up[branch_var] = std::floor(v);
            else
                child.lo[branch_var] = std::ceil(v);
            if (child.lo[branch_var] > child.up[branch_var] + 1e-9) continue;
            LpResult lp = lp_solve(s, child.lo, child.up, iters_left);
            iters_left -= lp.iterations;
            sol.simplex_iterations += lp.iterations;
            if (lp.status == SolveStatus::IterationLimit) {
                budget_hit = true;
                continue;
            }
            if (lp.status != SolveStatus::Optimal) continue;  // pruned by infeasibility
            if (have_incumbent && lp.objective >= best_obj - gap_abs(best_obj)) continue;
            child.bound = lp.objective;
            child.id = next_id++;
            child.x = std::move(lp.x);
            open.push(std::move(child));
        }
    }

    sol.nodes = nodes;
    if (!have_incumbent) {
        sol.status = budget_hit ? SolveStatus::IterationLimit : SolveStatus::Infeasible;
        return sol;
    }
    sol.status = budget_hit ? SolveStatus::IterationLimit : SolveStatus::Optimal;
    sol.objective = best_obj;
    sol.dual_bound = std::min(best_bound, best_obj);
    sol.values = std::move(best_x);
    return sol;
}

Solution brute_force_solve(const Model& model, const SolveOptions& options) {
    options.validate();
    if (!model.has_objective()) throw ModelError("brute_force_solve: model has no objective");

    const std::vector<int> ints = integer_indices(model);
    if (ints.size() > 20)
        throw ModelError("brute_force_solve: too many integer variables (limit 20)");

    bool bounds_infeasible = false;
    BoundSet base = model_bounds(model, options.integrality_tol, bounds_infeasible);
    Solution sol;
    if (bounds_infeasible) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }

    double combos = 1.0;
    for (int j : ints) {
        if (!std::isfinite(base.lo[j]) || !std::isfinite(base.up[j]))
            throw ModelError("brute_force_solve: integer variable with infinite bound");
        combos *= base.up[j] - base.lo[j] + 1.0;
        if (combos > (1 << 21))
            throw ModelError("brute_force_solve: too many integer assignments");
    }

    const Standardized s = standardize(model);
    std::vector<double> assign(ints.size());
    for (std::size_t k = 0; k < ints.size(); ++k) assign[k] = base.lo[ints[k]];

    bool have_best = false;
    bool saw_unbounded = false;
    double best_obj = kInf;
    std::vector<double> best_x;

    while (true) {
        std::vector<double> lo = base.lo, up = base.up;
        for (std::size_t k = 0; k < ints.size(); ++k) lo[ints[k]] = up[ints[k]] = assign[k];
        LpResult lp = lp_solve(s, lo, up, options.iteration_limit);
        sol.simplex_iterations += lp.iterations;
        ++sol.nodes;
        if (lp.status == SolveStatus::Unbounded) saw_unbounded = true;
        if (lp.status == SolveStatus::Optimal && lp.objective < best_obj - 1e-12) {
            best_obj = lp.objective;
            best_x = std::move(lp.x);
            have_best = true;
        }
        // advance the lexicographic assignment
        if (ints.empty()) break;
        std::size_t k = 0;
        while (k < ints.size()) {
            assign[k] += 1.0;
            if (assign[k] <= base.up[ints[k]] + 1e-9) break;
            assign[k] = base.lo[ints[k]];
            ++k;
        }
        if (k == ints.size()) break;
    }

    if (saw_unbounded) {
        sol.status = SolveStatus::Unbounded;
        return sol;
    }
    if (!have_best) {
        sol.status = SolveStatus::Infeasible;
        return sol;
    }
    sol.status = SolveStatus::Optimal;
    sol.objective = best_obj;
    sol.dual_bound = best_obj;
    sol.values = std::move(best_x);
    for (int j : ints) sol.values[j] = std::round(sol.values[j]);
    return sol;
}

std::string write_lp(const Model& model) {
    std::ostringstream os;
    auto term = [&](double c, int j, bool first) {
        std::string out;
        if (c >= 0)
            out += first ? "" : " + ";
        else
            out += first ? "-" : " - ";
        out += fmt9(std::fabs(c)) + " " + model.variable(j).name;
        return out;
    };
    os << "\\ lfcmsim model dump\n";
    os << "Minimize\n obj:";
    bool first = true;
    for (const auto& [j, c] : model.objective_coeffs()) {
        os << " " << term(c, j, first);
        first = false;
    }
    if (model.objective_constant() != 0.0 || first)
        os << (first ? " " : " + ") << fmt9(model.objective_constant());
    os << "\nSubject To\n";
    for (int i = 0; i < model.num_constraints(); ++i) {
        const Constraint& c = model.constraint(i);
        os << " c" << i << ":";
        bool f = true;
        for (const auto& [j, a] : c.coeffs) {
            os << " " << term(a, j, f);
            f = false;
        }
        if (f) os << " 0 " << model.variable(0).name;  // degenerate empty row
        switch (c.sense) {
            case Sense::LessEqual: os << " <= "; break;
            case Sense::Equal: os << " = "; break;
            case Sense::GreaterEqual: os << " >= "; break;
        }
        os << fmt9(c.rhs) << "\n";
    }
    os << "Bounds\n";
    for (int j = 0; j < model.num_variables(); ++j) {
        const Variable& v = model.variable(j);
        if (!std::isfinite(v.lower) && !std::isfinite(v.upper)) {
            os << " " << v.name << " free\n";
        } else {
            os << " ";
            if (std::isfinite(v.lower))
                os << fmt9(v.lower) << " <= ";
            else
                os << "-inf <= ";
            os << v.name;
            if (std::isfinite(v.upper)) os << " <= " << fmt9(v.upper);
            os << "\n";
        }
    }
    if (model.num_integer_variables() > 0) {
        os << "Generals\n";
        for (int j = 0; j < model.num_variables(); ++j)
            if (model.variable(j).is_integer) os << " " << model.variable(j).name << "\n";
    }
    os << "End\n";
    return os.str();
}

}  // namespace lfcm::milp
