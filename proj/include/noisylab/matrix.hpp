#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace noisylab {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    Matrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw std::invalid_argument("Matrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (double v : row) m(i, j++) = v;
      ++i;
    }
    return m;
  }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  const double* row(std::size_t r) const { return data_.data() + r * cols_; }
  double* row(std::size_t r) { return data_.data() + r * cols_; }

  void fill(double v) { data_.assign(data_.size(), v); }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Dense row-major matrix of {0,1} cells.
class BinaryMatrix {
 public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols, std::uint8_t fill = 0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (fill > 1) throw std::invalid_argument("BinaryMatrix: fill must be 0 or 1");
  }

  static BinaryMatrix from_rows(std::initializer_list<std::initializer_list<int>> rows) {
    BinaryMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) throw std::invalid_argument("BinaryMatrix::from_rows: ragged rows");
      std::size_t j = 0;
      for (int v : row) m.set(i, j++, v != 0);
      ++i;
    }
    return m;
  }

  std::uint8_t operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, bool v) { data_[r * cols_ + c] = v ? 1 : 0; }
  void flip(std::size_t r, std::size_t c) { data_[r * cols_ + c] ^= 1; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  const std::uint8_t* data() const { return data_.data(); }
  std::uint8_t* data() { return data_.data(); }

  /// Number of 1-cells in the whole matrix.
  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint8_t v : data_) n += v;
    return n;
  }

  /// Number of 1-cells in column c.
  std::size_t count_col(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t r = 0; r < rows_; ++r) n += data_[r * cols_ + c];
    return n;
  }

  /// Number of 1-cells in row r.
  std::size_t count_row(std::size_t r) const {
    std::size_t n = 0;
    for (std::size_t c = 0; c < cols_; ++c) n += data_[r * cols_ + c];
    return n;
  }

  bool operator==(const BinaryMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::uint8_t> data_;
};

/// Cell-wise XOR; used to reconstruct clean labels from noisy ones plus a flip mask.
inline BinaryMatrix xor_cells(const BinaryMatrix& a, const BinaryMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("xor_cells: shape mismatch");
  BinaryMatrix out(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) out.data()[i] = a.data()[i] ^ b.data()[i];
  return out;
}

}  // namespace noisylab
