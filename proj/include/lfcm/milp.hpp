#pragma once

// Self-contained mixed-integer linear programming facility: a model builder,
// a bounded-variable primal simplex for the LP relaxation, and a best-first
// branch-and-bound driver. Every scheduling and allocation problem in the
// simulator is expressed against this interface. A brute-force enumerator
// over the integer variables is provided as a test oracle.

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace lfcm::milp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Handle to a variable; carries the owning model's id so that references
/// from a different model are rejected.
struct VarRef {
    std::uint32_t model_id = 0;
    int index = -1;

    bool valid() const { return index >= 0; }
    bool operator==(const VarRef&) const = default;
};

enum class Sense { LessEqual, Equal, GreaterEqual };

/// Sparse linear expression over the variables of one model.
/// Supports the small amount of arithmetic the device builders need.
struct LinExpr {
    std::vector<std::pair<VarRef, double>> terms;
    double constant = 0.0;

    LinExpr() = default;
    explicit LinExpr(double c) : constant(c) {}
    LinExpr(VarRef v, double coeff = 1.0) { terms.emplace_back(v, coeff); }

    LinExpr& add(VarRef v, double coeff) {
        terms.emplace_back(v, coeff);
        return *this;
    }
    LinExpr& operator+=(const LinExpr& other) {
        terms.insert(terms.end(), other.terms.begin(), other.terms.end());
        constant += other.constant;
        return *this;
    }
    LinExpr& operator-=(const LinExpr& other) {
        for (const auto& [v, c] : other.terms) terms.emplace_back(v, -c);
        constant -= other.constant;
        return *this;
    }
    LinExpr& operator*=(double s) {
        for (auto& [v, c] : terms) c *= s;
        constant *= s;
        return *this;
    }
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
    friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
};

struct Variable {
    double lower = 0.0;
    double upper = kInf;
    bool is_integer = false;
    std::string name;
};

struct Constraint {
    std::vector<std::pair<int, double>> coeffs;  // variable index -> coefficient, merged
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

class Model {
public:
    Model();

    VarRef add_variable(double lower, double upper, bool is_integer, std::string name = {});
    int add_constraint(const LinExpr& expr, Sense sense, double rhs);
    void set_objective(const LinExpr& expr);

    int num_variables() const { return static_cast<int>(vars_.size()); }
    int num_constraints() const { return static_cast<int>(cons_.size()); }
    int num_integer_variables() const { return num_integer_; }
    const Variable& variable(int j) const { return vars_.at(j); }
    const Constraint& constraint(int i) const { return cons_.at(i); }
    const std::vector<std::pair<int, double>>& objective_coeffs() const { return obj_coeffs_; }
    double objective_constant() const { return obj_constant_; }
    bool has_objective() const { return has_objective_; }
    std::uint32_t id() const { return id_; }

    /// Max violation of any row/bound/integrality at x (original units).
    double max_violation(const std::vector<double>& x) const;
    double objective_value(const std::vector<double>& x) const;

private:
    std::vector<std::pair<int, double>> merge(const LinExpr& expr, double& constant_out) const;

    std::uint32_t id_;
    std::vector<Variable> vars_;
    std::vector<Constraint> cons_;
    std::vector<std::pair<int, double>> obj_coeffs_;
    double obj_constant_ = 0.0;
    bool has_objective_ = false;
    int num_integer_ = 0;
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, IterationLimit };

std::string to_string(SolveStatus s);

struct Solution {
    SolveStatus status = SolveStatus::Infeasible;
    double objective = 0.0;
    /// For LPs the dual objective at termination; for MILPs the best proven bound.
    double dual_bound = 0.0;
    std::vector<double> values;
    long simplex_iterations = 0;
    long nodes = 0;

    double value(VarRef v) const { return values.at(static_cast<std::size_t>(v.index)); }
    double value(const LinExpr& e) const {
        double acc = e.constant;
        for (const auto& [v, c] : e.terms) acc += c * values.at(static_cast<std::size_t>(v.index));
        return acc;
    }
};

struct SolveOptions {
    double feasibility_tol = 1e-6;
    double integrality_tol = 1e-6;
    double relative_gap = 1e-6;
    long node_limit = 200000;
    long iteration_limit = 5000000;  // total simplex iterations across the tree

    void validate() const {
        if (feasibility_tol <= 0 || integrality_tol <= 0 || relative_gap <= 0)
            throw ModelError("solve options: tolerances must be positive");
    }
};

/// Branch-and-bound MILP solve (plain simplex when no integer variables).
/// Deterministic: fixed pivot and branching tie-breaking by lowest index.
Solution solve(const Model& model, const SolveOptions& options = {});

/// Enumerates every integer assignment (<= 20 integer variables, finite
/// bounds) and solves the remaining LP for each; reference semantics for
/// solve(). Throws ModelError when the enumeration is too large.
Solution brute_force_solve(const Model& model, const SolveOptions& options = {});

/// Renders the model in LP-format text (Minimize / Subject To / Bounds /
/// Generals sections, decimal numbers with 9 significant digits).
std::string write_lp(const Model& model);

}  // namespace lfcm::milp
