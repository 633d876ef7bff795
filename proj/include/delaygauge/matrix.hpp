#pragma once

// Dense row-major matrices over double or complex<double>, plus the small set
// of kernels the rest of the library needs: LU solves, the matrix exponential,
// and the abs* transform used to build stability matrices.

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace delaygauge {

using complexd = std::complex<double>;

class singular_matrix_error : public std::runtime_error {
public:
    singular_matrix_error(const std::string& what, double pivot)
        : std::runtime_error(what), pivot_(pivot) {}
    double pivot() const noexcept { return pivot_; }

private:
    double pivot_;
};

template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    Matrix(std::initializer_list<std::initializer_list<T>> rows) {
        rows_ = rows.size();
        cols_ = rows_ ? rows.begin()->size() : 0;
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) throw std::invalid_argument("ragged initializer");
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    const std::vector<T>& data() const noexcept { return data_; }
    std::vector<T>& data() noexcept { return data_; }

    Matrix& operator+=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        check_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
        return *this;
    }
    Matrix& operator*=(T s) {
        for (auto& v : data_) v *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
    friend Matrix operator*(T s, Matrix a) { return a *= s; }
    friend Matrix operator*(Matrix a, T s) { return a *= s; }

    friend Matrix operator*(const Matrix& a, const Matrix& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
        Matrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i)
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const T aik = a(i, k);
                if (aik == T{}) continue;
                for (std::size_t j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    std::vector<T> apply(const std::vector<T>& x) const {
        if (x.size() != cols_) throw std::invalid_argument("matvec shape mismatch");
        std::vector<T> y(rows_, T{});
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
        return y;
    }

    // Max row sum of absolute values (induced infinity norm).
    double norm_inf() const {
        double best = 0.0;
        for (std::size_t i = 0; i < rows_; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) s += std::abs((*this)(i, j));
            best = std::max(best, s);
        }
        return best;
    }

    double max_abs() const {
        double best = 0.0;
        for (const auto& v : data_) best = std::max(best, std::abs(v));
        return best;
    }

    bool all_finite() const {
        for (const auto& v : data_)
            if (!std::isfinite(std::abs(v))) return false;
        return true;
    }

private:
    void check_same_shape(const Matrix& o) const {
        if (rows_ != o.rows_ || cols_ != o.cols_)
            throw std::invalid_argument("matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<T> data_;
};

using RMatrix = Matrix<double>;
using CMatrix = Matrix<complexd>;

inline CMatrix to_complex(const RMatrix& a) {
    CMatrix c(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) c(i, j) = a(i, j);
    return c;
}

/// abs*: keep the real part on the diagonal, take absolute values elsewhere.
template <typename T>
RMatrix abs_star(const Matrix<T>& a) {
    if (!a.square()) throw std::invalid_argument("abs_star: matrix must be square");
    RMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(i, j) = (i == j) ? std::real(complexd(a(i, j))) : std::abs(a(i, j));
    return out;
}

template <typename T>
RMatrix entrywise_abs(const Matrix<T>& a) {
    RMatrix out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) = std::abs(a(i, j));
    return out;
}

/// Solves A X = B by LU factorization with partial pivoting.
/// Throws singular_matrix_error when a pivot falls below 1e-13 * ||A||.
template <typename T>
Matrix<T> solve_linear(Matrix<T> a, Matrix<T> b) {
    if (!a.square()) throw std::invalid_argument("solve_linear: A must be square");
    if (a.rows() != b.rows()) throw std::invalid_argument("solve_linear: shape mismatch");
    const std::size_t n = a.rows();
    const double pivot_floor = 1e-13 * std::max(a.norm_inf(), 1e-300);

    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(a(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(a(i, k)) > best) { best = std::abs(a(i, k)); p = i; }
        if (best < pivot_floor)
            throw singular_matrix_error(
                "solve_linear: singular or near-singular matrix (pivot " +
                    std::to_string(best) + ")",
                best);
        if (p != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(k, j), a(p, j));
            for (std::size_t j = 0; j < b.cols(); ++j) std::swap(b(k, j), b(p, j));
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            const T m = a(i, k) / a(k, k);
            a(i, k) = m;
            for (std::size_t j = k + 1; j < n; ++j) a(i, j) -= m * a(k, j);
            for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) -= m * b(k, j);
        }
    }
    // Back substitution.
    for (std::size_t col = 0; col < b.cols(); ++col) {
        for (std::size_t ii = n; ii-- > 0;) {
            T s = b(ii, col);
            for (std::size_t j = ii + 1; j < n; ++j) s -= a(ii, j) * b(j, col);
            b(ii, col) = s / a(ii, ii);
        }
    }
    return b;
}

template <typename T>
std::vector<T> solve_linear(const Matrix<T>& a, const std::vector<T>& rhs) {
    Matrix<T> b(rhs.size(), 1);
    for (std::size_t i = 0; i < rhs.size(); ++i) b(i, 0) = rhs[i];
    Matrix<T> x = solve_linear(a, b);
    std::vector<T> out(rhs.size());
    for (std::size_t i = 0; i < rhs.size(); ++i) out[i] = x(i, 0);
    return out;
}

/// e^{A*scale} via scaling-and-squaring with the degree-13 Pade approximant.
inline RMatrix expm(const RMatrix& a_in, double scale = 1.0) {
    if (!a_in.square()) throw std::invalid_argument("expm: matrix must be square");
    const std::size_t n = a_in.rows();
    RMatrix a = a_in;
    a *= scale;
    if (!a.all_finite()) throw std::runtime_error("expm: non-finite input");

    const double theta13 = 5.371920351148152;  // degree-13 Pade threshold
    double nrm = a.norm_inf();
    int squarings = 0;
    if (nrm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
        a *= std::ldexp(1.0, -squarings);
    }

    static const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                               1187353796428800.0,  129060195264000.0,   10559470521600.0,
                               670442572800.0,      33522128640.0,       1323241920.0,
                               40840800.0,          960960.0,            16380.0,
                               182.0,               1.0};

    const RMatrix eye = RMatrix::identity(n);
    const RMatrix a2 = a * a;
    const RMatrix a4 = a2 * a2;
    const RMatrix a6 = a2 * a4;

    RMatrix u_inner = b[13] * a6 + b[11] * a4 + b[9] * a2;
    RMatrix u = a * (a6 * u_inner + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * eye);
    RMatrix v_inner = b[12] * a6 + b[10] * a4 + b[8] * a2;
    RMatrix v = a6 * v_inner + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * eye;

    RMatrix f = solve_linear(v - u, u + v);  // (V-U)^{-1}(U+V)
    for (int k = 0; k < squarings; ++k) f = f * f;
    if (!f.all_finite()) throw std::runtime_error("expm: overflow for the given norm");
    return f;
}

}  // namespace delaygauge
