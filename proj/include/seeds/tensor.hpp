#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace seeds {

// Dense row-major matrix of doubles. Weights are stored on disk as float32
// and widened on load.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double> column(std::size_t c) const;

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// A dense vector in embedding space. All entries are finite.
class Embedding {
 public:
  Embedding() = default;
  explicit Embedding(std::vector<double> values);

  static Embedding zeros(std::size_t dim) { return Embedding(std::vector<double>(dim, 0.0)); }

  std::size_t dim() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const;

  bool operator==(const Embedding&) const = default;

 private:
  std::vector<double> values_;
};

Embedding operator+(const Embedding& a, const Embedding& b);
Embedding operator-(const Embedding& a, const Embedding& b);
Embedding operator*(double s, const Embedding& a);
double dot(const Embedding& a, const Embedding& b);
double distance(std::span<const double> a, std::span<const double> b);

// Output of the SAE encoder: nonnegative, length m.
class SparseActivation {
 public:
  SparseActivation() = default;
  explicit SparseActivation(std::vector<double> values);

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t nnz() const noexcept;

  bool operator==(const SparseActivation&) const = default;

 private:
  std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Named-tensor container.
//
//   SAE1 <m> <n>\n
//   tensor <name> <rank> <dim0> [<dim1>] <offset>\n     (repeated)
//   attr <key> <value>\n                                (optional, repeated)
//   data\n
//   <raw little-endian float32 payload>
//
// <offset> is the byte offset of the tensor inside the payload. Tensors are
// laid out back to back in declaration order; the reader rejects any other
// arrangement. Embedding files use the same container with m = 0.
// ---------------------------------------------------------------------------
struct NamedTensor {
  std::vector<std::size_t> shape;
  std::vector<float> data;

  std::size_t numel() const;
};

struct TensorFile {
  std::size_t header_m = 0;
  std::size_t header_n = 0;
  // Declaration order is preserved separately because std::map sorts names.
  std::vector<std::string> order;
  std::map<std::string, NamedTensor> tensors;
  std::map<std::string, std::string> attrs;

  void add(const std::string& name, std::vector<std::size_t> shape, std::vector<float> data);
  const NamedTensor* find(const std::string& name) const;
};

TensorFile read_tensor_file(const std::filesystem::path& path);
void write_tensor_file(const std::filesystem::path& path, const TensorFile& file);

Embedding load_embedding(const std::filesystem::path& path);
void save_embedding(const std::filesystem::path& path, const Embedding& e);

}  // namespace seeds
