// Small dense LP solver: two-phase tableau simplex with Bland's rule.
// Instances here are tiny (at most a few hundred rows), so a dense tableau
// with a deterministic pivot rule is adequate.
#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdl {

inline constexpr double kLpPivotTol = 1e-10;
inline constexpr double kLpFeasTol = 1e-9;

// maximize objective . x  subject to  rows . x <= rhs,  lower <= x <= upper.
// Lower bounds must be finite; upper bounds may be +infinity.
struct LinearProgram {
    std::vector<double> objective;
    std::vector<std::vector<double>> rows;
    std::vector<double> rhs;
    std::vector<double> lower;
    std::vector<double> upper;

    std::size_t num_vars() const { return objective.size(); }

    void check_shape() const {
        if (rows.size() != rhs.size())
            throw std::invalid_argument("lp: row/rhs count mismatch");
        if (lower.size() != num_vars() || upper.size() != num_vars())
            throw std::invalid_argument("lp: bound size mismatch");
        for (const auto& r : rows)
            if (r.size() != num_vars())
                throw std::invalid_argument("lp: row width mismatch");
        for (std::size_t j = 0; j < num_vars(); ++j) {
            if (!std::isfinite(lower[j]))
                throw std::invalid_argument("lp: lower bounds must be finite");
            if (std::isnan(upper[j]))
                throw std::invalid_argument("lp: NaN upper bound");
        }
    }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    double value = 0.0;
    std::vector<double> x;
};

namespace lp_detail {

class Tableau {
  public:
    // Columns: n structural, then one slack per row, then artificials.
    Tableau(std::size_t n, const std::vector<std::vector<double>>& rows,
            const std::vector<double>& rhs)
        : n_(n), num_rows_(rows.size()) {
        num_art_ = 0;
        for (double b : rhs)
            if (b < -kLpFeasTol) ++num_art_;
        cols_ = n_ + num_rows_ + num_art_;
        a_.assign(num_rows_, std::vector<double>(cols_ + 1, 0.0));
        basis_.resize(num_rows_);
        allowed_.assign(cols_, true);

        std::size_t art = n_ + num_rows_;
        art_rows_.clear();
        for (std::size_t i = 0; i < num_rows_; ++i) {
            double sign = rhs[i] < -kLpFeasTol ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_; ++j) a_[i][j] = sign * rows[i][j];
            a_[i][n_ + i] = sign;  // slack
            a_[i][cols_] = sign * rhs[i];
            if (sign < 0) {
                a_[i][art] = 1.0;
                basis_[i] = static_cast<int>(art);
                art_rows_.push_back(i);
                ++art;
            } else {
                basis_[i] = static_cast<int>(n_ + i);
            }
        }
    }

    bool needs_phase1() const { return num_art_ > 0; }

    // Phase 1: maximize -sum(artificials). Returns false if infeasible.
    bool run_phase1() {
        obj_.assign(cols_, 0.0);
        obj_rhs_ = 0.0;
        for (std::size_t i : art_rows_) {
            for (std::size_t j = 0; j < cols_; ++j) obj_[j] += a_[i][j];
            obj_rhs_ -= a_[i][cols_];
        }
        for (std::size_t i = 0; i < num_rows_; ++i) obj_[static_cast<std::size_t>(basis_[i])] = 0.0;
        optimize();
        if (obj_rhs_ < -kLpFeasTol) return false;
        expel_artificials();
        for (std::size_t j = n_ + num_rows_; j < cols_; ++j) allowed_[j] = false;
        return true;
    }

    void run_phase2(const std::vector<double>& c) {
        obj_.assign(cols_, 0.0);
        obj_rhs_ = 0.0;
        for (std::size_t j = 0; j < n_; ++j) obj_[j] = c[j];
        // price out the current basis
        for (std::size_t i = 0; i < num_rows_; ++i) {
            std::size_t b = static_cast<std::size_t>(basis_[i]);
            double cb = obj_[b];
            if (cb == 0.0) continue;
            for (std::size_t j = 0; j < cols_; ++j) obj_[j] -= cb * a_[i][j];
            obj_rhs_ += cb * a_[i][cols_];
        }
        optimize();
    }

    std::vector<double> extract(std::size_t upto) const {
        std::vector<double> y(upto, 0.0);
        for (std::size_t i = 0; i < num_rows_; ++i) {
            std::size_t b = static_cast<std::size_t>(basis_[i]);
            if (b < upto) y[b] = a_[i][cols_];
        }
        return y;
    }

  private:
    // Bland's rule on both ends: entering = lowest-index improving column,
    // leaving = min ratio with ties broken by lowest basis index.
    void optimize() {
        const std::size_t iter_cap = 50000 + 50 * (num_rows_ + cols_);
        for (std::size_t iter = 0;; ++iter) {
            if (iter > iter_cap)
                throw std::runtime_error("simplex: iteration limit exceeded");
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j)
                if (allowed_[j] && obj_[j] > kLpPivotTol) { enter = j; break; }
            if (enter == cols_) return;  // optimal

            std::size_t leave = num_rows_;
            double best_ratio = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < num_rows_; ++i) {
                if (a_[i][enter] <= kLpPivotTol) continue;
                double ratio = a_[i][cols_] / a_[i][enter];
                if (ratio < best_ratio - 1e-12 ||
                    (ratio < best_ratio + 1e-12 &&
                     (leave == num_rows_ || basis_[i] < basis_[leave]))) {
                    best_ratio = ratio;
                    leave = i;
                }
            }
            if (leave == num_rows_) throw Unbounded{};
            pivot(leave, enter);
        }
    }

    void pivot(std::size_t r, std::size_t c) {
        double piv = a_[r][c];
        for (std::size_t j = 0; j <= cols_; ++j) a_[r][j] /= piv;
        a_[r][c] = 1.0;
        for (std::size_t i = 0; i < num_rows_; ++i) {
            if (i == r) continue;
            double f = a_[i][c];
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) a_[i][j] -= f * a_[r][j];
            a_[i][c] = 0.0;
        }
        double f = obj_[c];
        if (f != 0.0) {
            for (std::size_t j = 0; j < cols_; ++j) obj_[j] -= f * a_[r][j];
            obj_rhs_ += f * a_[r][cols_];
            obj_[c] = 0.0;
        }
        basis_[r] = static_cast<int>(c);
    }

    // Pivot basic artificials out at value zero; drop redundant rows.
    void expel_artificials() {
        for (std::size_t i = 0; i < num_rows_;) {
            std::size_t b = static_cast<std::size_t>(basis_[i]);
            if (b < n_ + num_rows_) { ++i; continue; }
            std::size_t c = cols_;
            for (std::size_t j = 0; j < n_ + num_rows_; ++j)
                if (std::fabs(a_[i][j]) > kLpPivotTol) { c = j; break; }
            if (c < cols_) {
                pivot(i, c);
                ++i;
            } else {
                a_.erase(a_.begin() + static_cast<std::ptrdiff_t>(i));
                basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(i));
                --num_rows_;
            }
        }
    }

  public:
    struct Unbounded {};

  private:
    std::size_t n_, num_rows_, num_art_, cols_;
    std::vector<std::vector<double>> a_;
    std::vector<double> obj_;
    double obj_rhs_ = 0.0;
    std::vector<int> basis_;
    std::vector<bool> allowed_;
    std::vector<std::size_t> art_rows_;
};

}  // namespace lp_detail

inline LpSolution solve(const LinearProgram& lp) {
    lp.check_shape();
    const std::size_t n = lp.num_vars();

    for (std::size_t j = 0; j < n; ++j)
        if (lp.upper[j] < lp.lower[j] - kLpFeasTol)
            return LpSolution{LpStatus::Infeasible, 0.0, {}};

    // Shift y = x - lower so y >= 0; finite upper bounds become rows.
    std::vector<std::vector<double>> rows = lp.rows;
    std::vector<double> rhs = lp.rhs;
    for (std::size_t i = 0; i < rhs.size(); ++i) {
        double shift = 0.0;
        for (std::size_t j = 0; j < n; ++j) shift += lp.rows[i][j] * lp.lower[j];
        rhs[i] -= shift;
    }
    for (std::size_t j = 0; j < n; ++j) {
        if (!std::isfinite(lp.upper[j])) continue;
        std::vector<double> row(n, 0.0);
        row[j] = 1.0;
        rows.push_back(std::move(row));
        rhs.push_back(lp.upper[j] - lp.lower[j]);
    }

    lp_detail::Tableau tab(n, rows, rhs);
    try {
        if (tab.needs_phase1() && !tab.run_phase1())
            return LpSolution{LpStatus::Infeasible, 0.0, {}};
        tab.run_phase2(lp.objective);
    } catch (const lp_detail::Tableau::Unbounded&) {
        return LpSolution{LpStatus::Unbounded, 0.0, {}};
    }

    std::vector<double> y = tab.extract(n);
    LpSolution sol;
    sol.status = LpStatus::Optimal;
    sol.x.resize(n);
    sol.value = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        sol.x[j] = lp.lower[j] + y[j];
        sol.value += lp.objective[j] * sol.x[j];
    }

    // Certify primal feasibility; a violation here means the pivoting went
    // numerically wrong and must not be reported as Optimal.
    for (std::size_t j = 0; j < n; ++j) {
        if (sol.x[j] < lp.lower[j] - kLpFeasTol || sol.x[j] > lp.upper[j] + kLpFeasTol)
            throw std::runtime_error("simplex: solution violates variable bounds");
    }
    for (std::size_t i = 0; i < lp.rows.size(); ++i) {
        double lhs = 0.0;
        for (std::size_t j = 0; j < n; ++j) lhs += lp.rows[i][j] * sol.x[j];
        if (lhs > lp.rhs[i] + kLpFeasTol)
            throw std::runtime_error("simplex: solution violates row " + std::to_string(i));
    }
    return sol;
}

}  // namespace cdl
