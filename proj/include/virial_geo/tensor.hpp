#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

namespace vgeo {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Chart coordinates q^1..q^n.
using Point = Eigen::VectorXd;

// Dense rank-3 array of extent n in every index, row-major in (i, j, k).
// Used for metric derivatives [i][j][k] = d g_ij / d q^k and for
// Christoffel symbols [i][j][k] = Gamma^i_{jk}.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int n) : n_(n), data_(static_cast<std::size_t>(n) * n * n, 0.0) {}

    int dim() const { return n_; }

    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    // Slice along the last index: entries [.][.][k].
    Mat slice_last(int k) const {
        Mat m(n_, n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j) m(i, j) = (*this)(i, j, k);
        return m;
    }

    double max_abs() const {
        double m = 0.0;
        for (double x : data_) m = std::max(m, std::abs(x));
        return m;
    }

    const std::vector<double>& data() const { return data_; }

private:
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * n_ + j) * n_ + k;
    }

    int n_ = 0;
    std::vector<double> data_;
};

inline double max_abs_diff(const Tensor3& a, const Tensor3& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace vgeo
