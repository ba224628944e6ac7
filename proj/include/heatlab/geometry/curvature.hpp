#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "heatlab/errors.hpp"
#include "heatlab/geometry/model_surface.hpp"

namespace heatlab {

// Dense component table R_ijkl at the base point, 0-based indices.
class CurvatureTensor {
  public:
    CurvatureTensor() = default;
    explicit CurvatureTensor(int n) : n_(n), a_(std::size_t(n) * n * n * n, 0.0) {}

    int dim() const { return n_; }
    double& operator()(int i, int j, int k, int l) {
        return a_[idx(i, j, k, l)];
    }
    double operator()(int i, int j, int k, int l) const {
        return a_[idx(i, j, k, l)];
    }

    double max_abs() const {
        double m = 0.0;
        for (double v : a_) m = std::max(m, std::abs(v));
        return m;
    }

    // Largest symmetry defect over all components, for validation.
    double symmetry_defect() const {
        double d = 0.0;
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    for (int l = 0; l < n_; ++l) {
                        const double v = (*this)(i, j, k, l);
                        d = std::max(d, std::abs(v + (*this)(j, i, k, l)));
                        d = std::max(d, std::abs(v + (*this)(i, j, l, k)));
                        d = std::max(d, std::abs(v - (*this)(k, l, i, j)));
                    }
        return d;
    }

    // Projects onto the symmetry class, making the identities exact.
    void symmetrize() {
        CurvatureTensor s(n_);
        for (int i = 0; i < n_; ++i)
            for (int j = 0; j < n_; ++j)
                for (int k = 0; k < n_; ++k)
                    for (int l = 0; l < n_; ++l) {
                        const double v =
                            (*this)(i, j, k, l) - (*this)(j, i, k, l) -
                            (*this)(i, j, l, k) + (*this)(j, i, l, k) +
                            (*this)(k, l, i, j) - (*this)(l, k, i, j) -
                            (*this)(k, l, j, i) + (*this)(l, k, j, i);
                        s(i, j, k, l) = v / 8.0;
                    }
        a_ = std::move(s.a_);
    }

  private:
    std::size_t idx(int i, int j, int k, int l) const {
        return ((std::size_t(i) * n_ + j) * n_ + k) * n_ + l;
    }
    int n_ = 0;
    std::vector<double> a_;
};

// Constant-curvature tensor R_ijkl = -K (d_ik d_jl - d_il d_jk), the sign
// convention under which R_1i1i = -kappa_i.
inline CurvatureTensor constant_curvature_tensor(double K, int n = 2) {
    CurvatureTensor R(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    const double dik = i == k, djl = j == l, dil = i == l,
                                 djk = j == k;
                    R(i, j, k, l) = -K * (dik * djl - dil * djk);
                }
    return R;
}

// Curvature eigendata at the base point: the component table in a basis where
// [R_1i1j] is diagonal, with kappa sorted descending.
struct CurvatureData {
    int n = 2;
    CurvatureTensor R;      // components in the stored eigenbasis
    Eigen::VectorXd kappa;  // kappa[0] = 0 by convention
    Eigen::MatrixXd basis;  // columns are the eigenbasis in the input frame

    std::vector<int> i_plus() const {
        std::vector<int> out;
        for (int i = 1; i < n; ++i)
            if (kappa[i] > 0) out.push_back(i);
        return out;
    }

    double max_abs_R_1lki(int i) const {
        double m = 0.0;
        for (int k = 0; k < n; ++k)
            for (int l = 0; l < n; ++l)
                m = std::max(m, std::abs(R(0, l, k, i)));
        return m;
    }
};

namespace detail {

inline CurvatureTensor rotate(const CurvatureTensor& R,
                              const Eigen::MatrixXd& B) {
    const int n = R.dim();
    CurvatureTensor out(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c)
                for (int d = 0; d < n; ++d) {
                    double s = 0.0;
                    for (int i = 0; i < n; ++i)
                        for (int j = 0; j < n; ++j)
                            for (int k = 0; k < n; ++k)
                                for (int l = 0; l < n; ++l)
                                    s += R(i, j, k, l) * B(i, a) * B(j, b) *
                                         B(k, c) * B(l, d);
                    out(a, b, c, d) = s;
                }
    return out;
}

} // namespace detail

inline CurvatureData curvature_data(const CurvatureTensor& raw,
                                    double tol = 1e-9) {
    const int n = raw.dim();
    if (n < 2) throw InvalidCurvatureError("curvature table needs n >= 2");
    const double scale = std::max(raw.max_abs(), 1.0);
    if (raw.symmetry_defect() > tol * scale)
        throw InvalidCurvatureError(
            "curvature table violates the R_ijkl symmetries beyond tolerance");

    CurvatureTensor R = raw;
    R.symmetrize();

    // Diagonalize [R_1i1j], i,j >= 2. Ascending eigenvalues of R_1i1j give
    // descending kappa = -eigenvalue, which is the stored order.
    Eigen::MatrixXd M(n - 1, n - 1);
    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) M(i - 1, j - 1) = R(0, i, 0, j);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(M);
    if (eig.info() != Eigen::Success)
        throw InvalidCurvatureError("eigendecomposition of R_1i1j failed");

    CurvatureData out;
    out.n = n;
    out.kappa = Eigen::VectorXd::Zero(n);
    out.basis = Eigen::MatrixXd::Identity(n, n);
    for (int i = 1; i < n; ++i) {
        out.kappa[i] = -eig.eigenvalues()[i - 1];
        Eigen::VectorXd v = eig.eigenvectors().col(i - 1);
        // Fix the sign so the decomposition is reproducible.
        int arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        out.basis.block(1, i, n - 1, 1) = v;
    }
    out.R = detail::rotate(R, out.basis);
    out.R.symmetrize();

    for (int i = 1; i < n; ++i)
        for (int j = 1; j < n; ++j) {
            const double want = (i == j) ? -out.kappa[i] : 0.0;
            if (std::abs(out.R(0, i, 0, j) - want) > 1e-8 * scale)
                throw InvalidCurvatureError(
                    "R_1i1j is not diagonal in the computed eigenbasis");
        }
    return out;
}

inline CurvatureData curvature_data(const ModelSurface& surface) {
    return curvature_data(constant_curvature_tensor(surface.K, 2));
}

} // namespace heatlab
