#pragma once

// Dense complex tensor algebra: contraction, permutation, QR/LQ splitting,
// isometry testing and seeded Haar-random unitaries. Row-major flat storage;
// leg order is semantic, permutations are explicit.

#include <Eigen/Dense>
#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace seqpeps {

using cplx = std::complex<double>;
using Matrix = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Global numeric tolerances. Unitarity/isometry and recontraction checks run
// at 1e-10; exact-arithmetic identities are asserted at 1e-12.
inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kExactTol = 1e-12;

class Tensor {
public:
    Tensor() = default;

    explicit Tensor(std::vector<std::size_t> shape)
        : shape_(std::move(shape)), data_(size_of(shape_), cplx{0.0, 0.0}) {}

    Tensor(std::vector<std::size_t> shape, std::vector<cplx> data)
        : shape_(std::move(shape)), data_(std::move(data)) {
        if (data_.size() != size_of(shape_))
            throw std::invalid_argument("Tensor: data length does not match shape");
    }

    static std::size_t size_of(const std::vector<std::size_t>& shape) {
        std::size_t n = 1;
        for (std::size_t d : shape) {
            if (d == 0) throw std::invalid_argument("Tensor: zero leg dimension");
            n *= d;
        }
        return n;
    }

    static Tensor identity(std::size_t dim) {
        Tensor t({dim, dim});
        for (std::size_t i = 0; i < dim; ++i) t.at({i, i}) = cplx{1.0, 0.0};
        return t;
    }

    std::size_t rank() const { return shape_.size(); }
    std::size_t size() const { return data_.size(); }
    std::size_t dim(std::size_t leg) const { return shape_.at(leg); }
    const std::vector<std::size_t>& shape() const { return shape_; }
    const std::vector<cplx>& data() const { return data_; }
    std::vector<cplx>& data() { return data_; }

    std::vector<std::string>& labels() { return labels_; }
    const std::vector<std::string>& labels() const { return labels_; }

    // Row-major strides: last leg fastest.
    std::vector<std::size_t> strides() const {
        std::vector<std::size_t> s(shape_.size(), 1);
        for (std::size_t i = shape_.size(); i-- > 1;)
            s[i - 1] = s[i] * shape_[i];
        return s;
    }

    cplx& at(const std::vector<std::size_t>& idx) { return data_[flat(idx)]; }
    const cplx& at(const std::vector<std::size_t>& idx) const { return data_[flat(idx)]; }

    std::size_t flat(const std::vector<std::size_t>& idx) const {
        std::size_t f = 0;
        for (std::size_t i = 0; i < shape_.size(); ++i) {
            if (idx[i] >= shape_[i]) throw std::out_of_range("Tensor::flat: index out of range");
            f = f * shape_[i] + idx[i];
        }
        return f;
    }

    Tensor conj() const {
        Tensor t = *this;
        for (auto& v : t.data_) v = std::conj(v);
        return t;
    }

    // Reinterpret the flat data with a new shape of equal total size.
    Tensor reshaped(std::vector<std::size_t> shape) const {
        if (size_of(shape) != data_.size())
            throw std::invalid_argument("Tensor::reshaped: size mismatch");
        return Tensor(std::move(shape), data_);
    }

    // permute[i] = which old leg becomes new leg i.
    Tensor permuted(const std::vector<std::size_t>& perm) const {
        if (perm.size() != shape_.size())
            throw std::invalid_argument("Tensor::permuted: rank mismatch");
        std::vector<std::size_t> new_shape(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) new_shape[i] = shape_.at(perm[i]);
        Tensor out(new_shape);
        const auto old_strides = strides();
        std::vector<std::size_t> stride_map(perm.size());
        for (std::size_t i = 0; i < perm.size(); ++i) stride_map[i] = old_strides[perm[i]];
        std::vector<std::size_t> idx(perm.size(), 0);
        for (std::size_t f = 0; f < out.size(); ++f) {
            std::size_t src = 0;
            for (std::size_t i = 0; i < idx.size(); ++i) src += idx[i] * stride_map[i];
            out.data_[f] = data_[src];
            for (std::size_t i = idx.size(); i-- > 0;) {
                if (++idx[i] < new_shape[i]) break;
                idx[i] = 0;
            }
        }
        return out;
    }

    double max_abs() const {
        double m = 0.0;
        for (const auto& v : data_) m = std::max(m, std::abs(v));
        return m;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& v : data_) s += std::norm(v);
        return std::sqrt(s);
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<cplx> data_;
    std::vector<std::string> labels_;
};

inline double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (a.shape() != b.shape())
        throw std::invalid_argument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

// Contract paired legs of a with legs of b. Result legs are the unpaired
// legs of a (original order) followed by those of b.
inline Tensor contract(const Tensor& a, const Tensor& b,
                       const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
    std::vector<bool> a_used(a.rank(), false), b_used(b.rank(), false);
    for (const auto& [la, lb] : pairs) {
        if (la >= a.rank() || lb >= b.rank())
            throw std::invalid_argument("contract: leg index out of range");
        if (a_used[la] || b_used[lb])
            throw std::invalid_argument("contract: a leg paired twice");
        if (a.dim(la) != b.dim(lb))
            throw std::invalid_argument("contract: dimension mismatch on paired legs");
        a_used[la] = true;
        b_used[lb] = true;
    }
    std::vector<std::size_t> a_free, b_free;
    for (std::size_t i = 0; i < a.rank(); ++i)
        if (!a_used[i]) a_free.push_back(i);
    for (std::size_t i = 0; i < b.rank(); ++i)
        if (!b_used[i]) b_free.push_back(i);

    // Permute a to (free..., paired...) and b to (paired..., free...), then
    // reduce to one matrix product.
    std::vector<std::size_t> a_perm = a_free, b_perm;
    for (const auto& p : pairs) a_perm.push_back(p.first);
    for (const auto& p : pairs) b_perm.push_back(p.second);
    for (std::size_t l : b_free) b_perm.push_back(l);

    const Tensor ap = a.permuted(a_perm);
    const Tensor bp = b.permuted(b_perm);

    std::size_t m = 1, k = 1, n = 1;
    for (std::size_t l : a_free) m *= a.dim(l);
    for (const auto& p : pairs) k *= a.dim(p.first);
    for (std::size_t l : b_free) n *= b.dim(l);

    Eigen::Map<const Matrix> ma(ap.data().data(), m, k);
    Eigen::Map<const Matrix> mb(bp.data().data(), k, n);
    Matrix mc = ma * mb;

    std::vector<std::size_t> out_shape;
    for (std::size_t l : a_free) out_shape.push_back(a.dim(l));
    for (std::size_t l : b_free) out_shape.push_back(b.dim(l));
    if (out_shape.empty()) out_shape.push_back(1);
    std::vector<cplx> out_data(mc.data(), mc.data() + m * n);
    return Tensor(std::move(out_shape), std::move(out_data));
}

// Tensor (Kronecker) product; result legs are a's legs followed by b's legs.
inline Tensor outer(const Tensor& a, const Tensor& b) {
    return contract(a, b, {});
}

namespace detail {

inline Matrix as_matrix(const Tensor& t, const std::vector<std::size_t>& left_legs) {
    std::vector<bool> is_left(t.rank(), false);
    for (std::size_t l : left_legs) {
        if (l >= t.rank()) throw std::invalid_argument("leg index out of range");
        if (is_left[l]) throw std::invalid_argument("duplicate leg");
        is_left[l] = true;
    }
    std::vector<std::size_t> perm = left_legs;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!is_left[i]) perm.push_back(i);
    const Tensor tp = t.permuted(perm);
    std::size_t rows = 1;
    for (std::size_t l : left_legs) rows *= t.dim(l);
    const std::size_t cols = t.size() / rows;
    Matrix m(rows, cols);
    std::copy(tp.data().begin(), tp.data().end(), m.data());
    return m;
}

// QR with the phase convention diag(R) real non-negative, so the
// factorization is deterministic. Zero columns keep phase 1.
inline void phased_qr(const Matrix& m, Matrix& q, Matrix& r) {
    Eigen::HouseholderQR<Matrix> qr(m);
    const std::size_t k = std::min<std::size_t>(m.rows(), m.cols());
    Matrix thin_q = qr.householderQ() * Matrix::Identity(m.rows(), k);
    Matrix full_r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    for (std::size_t i = 0; i < k; ++i) {
        const cplx d = full_r(i, i);
        const cplx ph = std::abs(d) > 0.0 ? d / std::abs(d) : cplx{1.0, 0.0};
        thin_q.col(i) *= ph;
        full_r.row(i) *= std::conj(ph);
    }
    q = std::move(thin_q);
    r = std::move(full_r);
}

}  // namespace detail

// Split t = q . r across a new bond, with q an isometry from the bond into
// left_legs and r carrying the bond plus the remaining legs. For the zero
// tensor, r = 0 and q is an orthonormal completion (deterministic).
inline std::pair<Tensor, Tensor> qr_split(const Tensor& t,
                                          const std::vector<std::size_t>& left_legs) {
    if (left_legs.empty() || left_legs.size() >= t.rank())
        throw std::invalid_argument("qr_split: left_legs must be a nonempty proper subset");
    const Matrix m = detail::as_matrix(t, left_legs);
    Matrix q, r;
    detail::phased_qr(m, q, r);
    const std::size_t bond = q.cols();

    std::vector<std::size_t> q_shape;
    for (std::size_t l : left_legs) q_shape.push_back(t.dim(l));
    q_shape.push_back(bond);
    std::vector<cplx> q_data(q.data(), q.data() + q.size());
    // Eigen matrices here are row-major, so the flat layout already matches
    // (left..., bond) row-major order.
    Tensor qt(std::move(q_shape), std::move(q_data));

    std::vector<bool> is_left(t.rank(), false);
    for (std::size_t l : left_legs) is_left[l] = true;
    std::vector<std::size_t> r_shape{bond};
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!is_left[i]) r_shape.push_back(t.dim(i));
    std::vector<cplx> r_data(r.data(), r.data() + r.size());
    Tensor rt(std::move(r_shape), std::move(r_data));
    return {std::move(qt), std::move(rt)};
}

// Rank-revealing variant of qr_split: t = q . r with q an isometry into
// left_legs and the bond truncated to the singular values above
// cutoff * s_max (at least one). Exact up to the cutoff on the discarded
// spectrum (zero here whenever the matrix is rank-deficient).
inline std::pair<Tensor, Tensor> svd_split(const Tensor& t,
                                           const std::vector<std::size_t>& left_legs,
                                           double cutoff = 1e-12) {
    if (left_legs.empty() || left_legs.size() >= t.rank())
        throw std::invalid_argument("svd_split: left_legs must be a nonempty proper subset");
    const Matrix m = detail::as_matrix(t, left_legs);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    std::size_t bond = 1;
    if (sv.size() > 0) {
        const double thresh = sv(0) * cutoff;
        bond = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
            if (sv(i) > thresh) ++bond;
        if (bond == 0) bond = 1;
    }
    Matrix q = svd.matrixU().leftCols(static_cast<Eigen::Index>(bond));
    Matrix r = sv.head(static_cast<Eigen::Index>(bond)).asDiagonal() *
               svd.matrixV().leftCols(static_cast<Eigen::Index>(bond)).adjoint();

    std::vector<std::size_t> q_shape;
    for (std::size_t l : left_legs) q_shape.push_back(t.dim(l));
    q_shape.push_back(bond);
    Tensor qt(std::move(q_shape), std::vector<cplx>(q.data(), q.data() + q.size()));

    std::vector<bool> is_left(t.rank(), false);
    for (std::size_t l : left_legs) is_left[l] = true;
    std::vector<std::size_t> r_shape{bond};
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!is_left[i]) r_shape.push_back(t.dim(i));
    Tensor rt(std::move(r_shape), std::vector<cplx>(r.data(), r.data() + r.size()));
    return {std::move(qt), std::move(rt)};
}

// Split t = l . w with w having orthonormal rows (an isometry from the new
// bond into right_legs). Counterpart of qr_split used when the isometric
// factor must sit on the trailing legs.
inline std::pair<Tensor, Tensor> lq_split(const Tensor& t,
                                          const std::vector<std::size_t>& right_legs) {
    if (right_legs.empty() || right_legs.size() >= t.rank())
        throw std::invalid_argument("lq_split: right_legs must be a nonempty proper subset");
    std::vector<bool> is_right(t.rank(), false);
    for (std::size_t l : right_legs) is_right[l] = true;
    std::vector<std::size_t> left_legs;
    for (std::size_t i = 0; i < t.rank(); ++i)
        if (!is_right[i]) left_legs.push_back(i);

    Matrix m = detail::as_matrix(t, left_legs);  // rows = left, cols = right
    Matrix q, r;
    detail::phased_qr(m.adjoint().eval(), q, r);
    // m = (q r)^dagger = r^dagger q^dagger; rows of q^dagger are orthonormal.
    Matrix lfac = r.adjoint();
    Matrix wfac = q.adjoint();
    const std::size_t bond = lfac.cols();

    std::vector<std::size_t> l_shape;
    for (std::size_t l : left_legs) l_shape.push_back(t.dim(l));
    l_shape.push_back(bond);
    Matrix lrm = lfac;  // row-major copy
    std::vector<cplx> l_data(lrm.data(), lrm.data() + lrm.size());
    Tensor lt(std::move(l_shape), std::move(l_data));

    std::vector<std::size_t> w_shape{bond};
    for (std::size_t l : right_legs) w_shape.push_back(t.dim(l));
    Matrix wrm = wfac;
    std::vector<cplx> w_data(wrm.data(), wrm.data() + wrm.size());
    Tensor wt(std::move(w_shape), std::move(w_data));
    return {std::move(lt), std::move(wt)};
}

struct IsometryResult {
    bool flag = false;
    double residual = 0.0;
};

// Contract t with conj(t) over in_legs and compare against the identity on
// the remaining legs. residual is the max-norm deviation.
inline IsometryResult is_isometry(const Tensor& t, const std::vector<std::size_t>& in_legs,
                                  double tol = kUnitaryTol) {
    if (in_legs.empty()) throw std::invalid_argument("is_isometry: in_legs empty");
    const Matrix m = detail::as_matrix(t, in_legs);  // rows = in, cols = rest
    Matrix g = m.adjoint() * m;
    double residual = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j) {
            const cplx expect = (i == j) ? cplx{1.0, 0.0} : cplx{0.0, 0.0};
            residual = std::max(residual, std::abs(g(i, j) - expect));
        }
    return {residual <= tol, residual};
}

inline double unitarity_residual(const Tensor& u) {
    if (u.rank() != 2 || u.dim(0) != u.dim(1))
        throw std::invalid_argument("unitarity_residual: not a square matrix");
    return is_isometry(u, {0}).residual;
}

// Haar-distributed unitary from a seeded complex Gaussian matrix,
// orthonormalized with the triangular factor's diagonal phases divided out.
// Deterministic for a fixed (dim, seed).
inline Tensor random_unitary(std::size_t dim, std::uint64_t seed) {
    if (dim == 0) throw std::invalid_argument("random_unitary: dim must be positive");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix g(dim, dim);
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
            g(i, j) = cplx{gauss(rng), gauss(rng)};
    Matrix q, r;
    detail::phased_qr(g, q, r);
    std::vector<cplx> data(q.data(), q.data() + q.size());
    return Tensor({dim, dim}, std::move(data));
}

// Seeded random tensor with unit-variance complex Gaussian entries.
inline Tensor random_tensor(const std::vector<std::size_t>& shape, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Tensor t(shape);
    for (auto& v : t.data()) v = cplx{gauss(rng), gauss(rng)};
    return t;
}

// Deterministic unitary completion: extend an isometry (in_dim columns of an
// out_dim-dimensional space, in_dim <= out_dim) to a full unitary. The
// completion basis is fixed by QR of the orthogonal complement projector.
inline Matrix complete_isometry(const Matrix& v) {
    const std::size_t out_dim = v.rows(), in_dim = v.cols();
    if (in_dim > out_dim)
        throw std::invalid_argument("complete_isometry: more columns than rows");
    Matrix residual = (v.adjoint() * v - Matrix::Identity(in_dim, in_dim));
    if (residual.cwiseAbs().maxCoeff() > kUnitaryTol)
        throw std::invalid_argument("complete_isometry: input is not an isometry, residual " +
                                    std::to_string(residual.cwiseAbs().maxCoeff()));
    if (in_dim == out_dim) return v;
    // Orthonormalize (I - V V^dagger) applied to the standard basis.
    Matrix proj = Matrix::Identity(out_dim, out_dim) - v * v.adjoint();
    Matrix q, r;
    detail::phased_qr(proj, q, r);
    // Keep the columns spanning the complement: those with nonzero diagonal
    // in R, taken in order.
    Matrix full(out_dim, out_dim);
    full.leftCols(in_dim) = v;
    std::size_t filled = in_dim;
    for (std::size_t i = 0; i < out_dim && filled < out_dim; ++i) {
        Eigen::VectorXcd cand = q.col(i);
        // Re-orthogonalize against what we already have.
        cand -= full.leftCols(filled) * (full.leftCols(filled).adjoint() * cand);
        const double nrm = cand.norm();
        if (nrm > 1e-8) {
            full.col(filled) = cand / nrm;
            ++filled;
        }
    }
    if (filled != out_dim)
        throw std::runtime_error("complete_isometry: failed to complete basis");
    return full;
}

}  // namespace seqpeps
