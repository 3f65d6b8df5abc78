#pragma once

#include "projgeo/error.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace projgeo {

using cplx = std::complex<double>;

/// Dense complex matrix, row-major. Zero-sized matrices are allowed so that
/// empty subspace bases (n x 0) can be carried around without special cases.
class CMatrix {
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    CMatrix(std::size_t rows, std::size_t cols, std::vector<cplx> data)
        : rows_(rows), cols_(cols), data_(std::move(data)) {
        if (data_.size() != rows_ * cols_) {
            throw Error(ErrorCode::BadInput, "CMatrix data size " + std::to_string(data_.size()) +
                                                 " does not match " + std::to_string(rows_) + "x" +
                                                 std::to_string(cols_));
        }
    }
    CMatrix(std::initializer_list<std::initializer_list<cplx>> rows) {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw Error(ErrorCode::BadInput, "ragged initializer list");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static CMatrix zeros(std::size_t rows, std::size_t cols) { return CMatrix(rows, cols); }

    static CMatrix identity(std::size_t n) {
        CMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    static CMatrix diag(std::span<const double> d) {
        CMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }
    static CMatrix diag(std::initializer_list<double> d) {
        return diag(std::span<const double>(d.begin(), d.size()));
    }
    static CMatrix diag(std::span<const cplx> d) {
        CMatrix m(d.size(), d.size());
        for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
        return m;
    }

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] bool is_square() const noexcept { return rows_ == cols_; }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    [[nodiscard]] std::span<const cplx> data() const noexcept { return data_; }
    [[nodiscard]] std::span<cplx> data() noexcept { return data_; }

    [[nodiscard]] CMatrix adjoint() const {
        CMatrix r(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) r(j, i) = std::conj((*this)(i, j));
        return r;
    }

    [[nodiscard]] CMatrix col(std::size_t j) const { return cols_range(j, j + 1); }

    /// Columns [first, last).
    [[nodiscard]] CMatrix cols_range(std::size_t first, std::size_t last) const {
        CMatrix r(rows_, last - first);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = first; j < last; ++j) r(i, j - first) = (*this)(i, j);
        return r;
    }

    [[nodiscard]] CMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
        CMatrix r(nr, nc);
        for (std::size_t i = 0; i < nr; ++i)
            for (std::size_t j = 0; j < nc; ++j) r(i, j) = (*this)(r0 + i, c0 + j);
        return r;
    }

    void set_block(std::size_t r0, std::size_t c0, const CMatrix& b) {
        for (std::size_t i = 0; i < b.rows(); ++i)
            for (std::size_t j = 0; j < b.cols(); ++j) (*this)(r0 + i, c0 + j) = b(i, j);
    }

    [[nodiscard]] cplx trace() const {
        cplx t = 0.0;
        for (std::size_t i = 0; i < std::min(rows_, cols_); ++i) t += (*this)(i, i);
        return t;
    }

    [[nodiscard]] double frobenius_norm() const {
        double s = 0.0;
        for (const auto& z : data_) s += std::norm(z);
        return std::sqrt(s);
    }

    [[nodiscard]] double max_abs() const {
        double m = 0.0;
        for (const auto& z : data_) m = std::max(m, std::abs(z));
        return m;
    }

    [[nodiscard]] bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(),
                           [](const cplx& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
    }

    CMatrix& operator+=(const CMatrix& o) {
        check_same_shape(o, "+");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    CMatrix& operator-=(const CMatrix& o) {
        check_same_shape(o, "-");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    CMatrix& operator*=(cplx s) {
        for (auto& z : data_) z *= s;
        return *this;
    }

    friend CMatrix operator+(CMatrix a, const CMatrix& b) { return a += b; }
    friend CMatrix operator-(CMatrix a, const CMatrix& b) { return a -= b; }
    friend CMatrix operator-(CMatrix a) {
        for (auto& z : a.data_) z = -z;
        return a;
    }
    friend CMatrix operator*(CMatrix a, cplx s) { return a *= s; }
    friend CMatrix operator*(cplx s, CMatrix a) { return a *= s; }
    friend CMatrix operator*(CMatrix a, double s) { return a *= cplx(s); }
    friend CMatrix operator*(double s, CMatrix a) { return a *= cplx(s); }

    friend CMatrix operator*(const CMatrix& a, const CMatrix& b) {
        if (a.cols_ != b.rows_) {
            throw Error(ErrorCode::DimMismatch, "product of " + a.shape() + " and " + b.shape());
        }
        CMatrix r(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const cplx aik = a(i, k);
                if (aik == cplx(0.0)) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) r(i, j) += aik * b(k, j);
            }
        }
        return r;
    }

    friend bool operator==(const CMatrix& a, const CMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    [[nodiscard]] std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

private:
    void check_same_shape(const CMatrix& o, const char* op) const {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw Error(ErrorCode::DimMismatch, std::string("operator") + op + " on " + shape() + " and " + o.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

/// [a | b], same row count.
inline CMatrix hstack(const CMatrix& a, const CMatrix& b) {
    if (a.rows() != b.rows() && a.cols() != 0 && b.cols() != 0) {
        throw Error(ErrorCode::DimMismatch, "hstack of " + a.shape() + " and " + b.shape());
    }
    const std::size_t rows = a.cols() == 0 ? b.rows() : a.rows();
    CMatrix r(rows, a.cols() + b.cols());
    r.set_block(0, 0, a);
    r.set_block(0, a.cols(), b);
    return r;
}

/// Block-diagonal direct sum a ⊕ b.
inline CMatrix direct_sum(const CMatrix& a, const CMatrix& b) {
    CMatrix r(a.rows() + b.rows(), a.cols() + b.cols());
    r.set_block(0, 0, a);
    r.set_block(a.rows(), a.cols(), b);
    return r;
}

inline CMatrix hermitian_part(const CMatrix& a) { return 0.5 * (a + a.adjoint()); }
inline CMatrix skew_part(const CMatrix& a) { return 0.5 * (a - a.adjoint()); }

/// Commutator [a, b] = ab - ba.
inline CMatrix commutator(const CMatrix& a, const CMatrix& b) { return a * b - b * a; }

} // namespace projgeo
