#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "wmlab/models.hpp"

namespace wmlab {

// Density tabulated on a uniform grid x_k = min + k * step.
class NumericPdf {
public:
    NumericPdf(double min, double step, std::vector<double> density);

    // Samples f at n points spanning [min, max]; non-finite values (density
    // poles) are replaced by the value half a step inside the grid.
    static NumericPdf tabulate(const std::function<double(double)>& f, double min, double max, std::size_t n);

    double min() const { return min_; }
    double step() const { return step_; }
    double max() const { return min_ + step_ * static_cast<double>(values_.size() - 1); }
    std::size_t size() const { return values_.size(); }
    const std::vector<double>& values() const { return values_; }

    double integral() const;
    // Trapezoid estimate of E g(U).
    double expect(const std::function<double(double)>& g) const;
    // Linear interpolation; zero outside the grid.
    double at(double x) const;

private:
    double min_;
    double step_;
    std::vector<double> values_;
};

// Density of U = X + V from the densities of X and V. The grids must share
// the same step; the output is renormalized to unit mass.
NumericPdf pdf_convolve(const NumericPdf& f, const NumericPdf& g);

// E g(X) under the model by adaptive quadrature. `breaks` lists interior
// points where g is not smooth (the density's own kink at 0 is added).
double expect(const HostModel& m, const std::function<double(double)>& g, std::vector<double> breaks = {});

// A point t with P(|X| > t) below tail_prob.
double tail_bound(const HostModel& m, double tail_prob = 1e-13);

}  // namespace wmlab
