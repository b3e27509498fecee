#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace cbec {

using cplx = std::complex<double>;
constexpr double pi = std::numbers::pi;

// Bad caller input: preconditions, schema, grid mismatch.
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A numerical procedure failed or a postcondition did not hold.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InputError(msg);
}

inline void ensure(bool cond, const std::string& msg)
{
    if (!cond) throw NumericalError(msg);
}

struct Check {
    std::string quantity;
    double value = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct Report {
    std::string name;
    std::vector<Check> checks;

    void add(std::string quantity, double value, double bound, bool pass)
    {
        checks.push_back({std::move(quantity), value, bound, pass});
    }
    // value <= bound
    void add_le(std::string quantity, double value, double bound)
    {
        add(std::move(quantity), value, bound, value <= bound);
    }
    // value >= bound
    void add_ge(std::string quantity, double value, double bound)
    {
        add(std::move(quantity), value, bound, value >= bound);
    }
    bool pass() const
    {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
    const Check* find(const std::string& quantity) const
    {
        for (const auto& c : checks)
            if (c.quantity == quantity) return &c;
        return nullptr;
    }
};

template <typename Derived>
double trapezoid(const Eigen::MatrixBase<Derived>& f, double h)
{
    const auto n = f.size();
    if (n < 2) return 0.0;
    return h * (f.sum() - 0.5 * (f(0) + f(n - 1)));
}

// Least-squares slope of y against x.
template <typename DX, typename DY>
double fit_slope(const Eigen::MatrixBase<DX>& x, const Eigen::MatrixBase<DY>& y)
{
    const double mx = x.mean();
    const double my = y.mean();
    const double sxx = (x.array() - mx).square().sum();
    const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
    return sxy / sxx;
}

inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y)
{
    Eigen::VectorXd lx(x.size()), ly(y.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx(i) = std::log(x[i]);
        ly(i) = std::log(y[i]);
    }
    return fit_slope(lx, ly);
}

inline double rel_diff(double a, double b)
{
    const double s = std::max(std::abs(a), std::abs(b));
    return s == 0.0 ? 0.0 : std::abs(a - b) / s;
}

}  // namespace cbec
