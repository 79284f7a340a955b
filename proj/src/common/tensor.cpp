#include "seeds/tensor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "seeds/error.hpp"

namespace seeds {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows * cols, ErrorCode::ShapeMismatch, "matrix data size does not match shape");
}

std::vector<double> Matrix::column(std::size_t c) const {
  std::vector<double> out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
  return out;
}

Embedding::Embedding(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    require(std::isfinite(v), ErrorCode::PreconditionViolated, "embedding has a non-finite entry");
}

double Embedding::norm() const {
  double s = 0.0;
  for (double v : values_) s += v * v;
  return std::sqrt(s);
}

namespace {
void check_dims(const Embedding& a, const Embedding& b) {
  require(a.dim() == b.dim(), ErrorCode::DimMismatch,
          "embedding dims differ: " + std::to_string(a.dim()) + " vs " + std::to_string(b.dim()));
}
}  // namespace

Embedding operator+(const Embedding& a, const Embedding& b) {
  check_dims(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] + b[i];
  return Embedding(std::move(out));
}

Embedding operator-(const Embedding& a, const Embedding& b) {
  check_dims(a, b);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a[i] - b[i];
  return Embedding(std::move(out));
}

Embedding operator*(double s, const Embedding& a) {
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = s * a[i];
  return Embedding(std::move(out));
}

double dot(const Embedding& a, const Embedding& b) {
  check_dims(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

SparseActivation::SparseActivation(std::vector<double> values) : values_(std::move(values)) {
  for (double v : values_)
    require(std::isfinite(v) && v >= 0.0, ErrorCode::PreconditionViolated,
            "sparse activation entries must be finite and nonnegative");
}

std::size_t SparseActivation::nnz() const noexcept {
  return static_cast<std::size_t>(std::count_if(values_.begin(), values_.end(), [](double v) { return v > 0.0; }));
}

// ---------------------------------------------------------------------------

std::size_t NamedTensor::numel() const {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

void TensorFile::add(const std::string& name, std::vector<std::size_t> shape, std::vector<float> data) {
  NamedTensor t{std::move(shape), std::move(data)};
  require(t.numel() == t.data.size(), ErrorCode::ShapeMismatch, "tensor '" + name + "' data does not match shape");
  if (!tensors.contains(name)) order.push_back(name);
  tensors[name] = std::move(t);
}

const NamedTensor* TensorFile::find(const std::string& name) const {
  auto it = tensors.find(name);
  return it == tensors.end() ? nullptr : &it->second;
}

namespace {

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0xFF) << 24) | ((v & 0xFF00) << 8) | ((v >> 8) & 0xFF00) | (v >> 24);
  }
  return v;
}

}  // namespace

TensorFile read_tensor_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open tensor file " + path.string());

  TensorFile file;
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), ErrorCode::Io, "empty tensor file " + path.string());
  {
    std::istringstream hs(line);
    std::string magic;
    hs >> magic >> file.header_m >> file.header_n;
    require(magic == "SAE1" && !hs.fail(), ErrorCode::Io, "bad tensor file header in " + path.string());
  }

  struct Decl {
    std::string name;
    std::vector<std::size_t> shape;
    std::size_t offset;
  };
  std::vector<Decl> decls;
  bool saw_data = false;
  while (std::getline(in, line)) {
    if (line == "data") {
      saw_data = true;
      break;
    }
    std::istringstream ls(line);
    std::string kind;
    ls >> kind;
    if (kind == "tensor") {
      Decl d;
      std::size_t rank = 0;
      ls >> d.name >> rank;
      require(!ls.fail() && (rank == 1 || rank == 2), ErrorCode::Io, "bad tensor declaration: " + line);
      d.shape.resize(rank);
      for (auto& s : d.shape) ls >> s;
      ls >> d.offset;
      require(!ls.fail(), ErrorCode::Io, "bad tensor declaration: " + line);
      decls.push_back(std::move(d));
    } else if (kind == "attr") {
      std::string key, value;
      ls >> key;
      std::getline(ls >> std::ws, value);
      file.attrs[key] = value;
    } else {
      fail(ErrorCode::Io, "unexpected header line: " + line);
    }
  }
  require(saw_data, ErrorCode::Io, "tensor file has no data section");

  std::vector<char> payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::size_t expected_offset = 0;
  for (const auto& d : decls) {
    require(d.offset == expected_offset, ErrorCode::Io, "tensor '" + d.name + "' is not in declaration order");
    const std::size_t numel =
        std::accumulate(d.shape.begin(), d.shape.end(), std::size_t{1}, std::multiplies<>());
    const std::size_t bytes = numel * sizeof(float);
    require(d.offset + bytes <= payload.size(), ErrorCode::Io, "tensor '" + d.name + "' is truncated");
    std::vector<float> values(numel);
    for (std::size_t i = 0; i < numel; ++i) {
      std::uint32_t raw;
      std::memcpy(&raw, payload.data() + d.offset + i * sizeof(float), sizeof raw);
      values[i] = std::bit_cast<float>(to_le(raw));
    }
    file.add(d.name, d.shape, std::move(values));
    expected_offset += bytes;
  }
  return file;
}

void write_tensor_file(const std::filesystem::path& path, const TensorFile& file) {
  std::ostringstream header;
  header << "SAE1 " << file.header_m << ' ' << file.header_n << '\n';
  std::size_t offset = 0;
  for (const auto& name : file.order) {
    const auto& t = file.tensors.at(name);
    header << "tensor " << name << ' ' << t.shape.size();
    for (auto s : t.shape) header << ' ' << s;
    header << ' ' << offset << '\n';
    offset += t.data.size() * sizeof(float);
  }
  for (const auto& [k, v] : file.attrs) header << "attr " << k << ' ' << v << '\n';
  header << "data\n";

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write tensor file " + path.string());
  const std::string h = header.str();
  out.write(h.data(), static_cast<std::streamsize>(h.size()));
  for (const auto& name : file.order) {
    for (float f : file.tensors.at(name).data) {
      const std::uint32_t raw = to_le(std::bit_cast<std::uint32_t>(f));
      out.write(reinterpret_cast<const char*>(&raw), sizeof raw);
    }
  }
  require(static_cast<bool>(out), ErrorCode::Io, "short write to " + path.string());
}

Embedding load_embedding(const std::filesystem::path& path) {
  const TensorFile file = read_tensor_file(path);
  const NamedTensor* t = file.find("embedding");
  require(t != nullptr, ErrorCode::MissingTensor, "embedding file lacks tensor 'embedding'");
  require(t->shape.size() == 1, ErrorCode::ShapeMismatch, "embedding tensor must be rank 1");
  require(file.header_n == 0 || file.header_n == t->shape[0], ErrorCode::ShapeMismatch,
          "embedding length disagrees with header");
  return Embedding(std::vector<double>(t->data.begin(), t->data.end()));
}

void save_embedding(const std::filesystem::path& path, const Embedding& e) {
  TensorFile file;
  file.header_m = 0;
  file.header_n = e.dim();
  std::vector<float> data(e.values().begin(), e.values().end());
  file.add("embedding", {e.dim()}, std::move(data));
  write_tensor_file(path, file);
}

}  // namespace seeds
