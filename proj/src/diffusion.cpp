#include "prodgraph/diffusion.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <string>

#include "prodgraph/error.hpp"
#include "prodgraph/kernels.hpp"

namespace prodgraph {

Index Tensor::size() const {
  Index n = 1;
  for (Index e : shape) n *= e;
  return n;
}

Index Tensor::stride(Index axis) const {
  Index s = 1;
  for (Index a = 0; a < axis; ++a) s *= shape[a];
  return s;
}

FilterSpec::FilterSpec(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  detail::require(!coeffs_.empty(), "filter: need at least one coefficient");
  detail::require(std::any_of(coeffs_.begin(), coeffs_.end(), [](double c) { return c != 0.0; }),
                  "filter: all coefficients are zero");
  detail::require(std::all_of(coeffs_.begin(), coeffs_.end(), [](double c) { return std::isfinite(c); }),
                  "filter: non-finite coefficient");
}

double FilterSpec::response(double x) const {
  double acc = coeffs_.back();
  for (auto l = static_cast<long>(coeffs_.size()) - 2; l >= 0; --l) acc = acc * x + coeffs_[l];
  return acc;
}

SignalBatch::SignalBatch(Matrix X, std::vector<Index> shape) : X_(std::move(X)), shape_(std::move(shape)) {
  if (shape_.empty()) shape_ = {X_.rows()};
  detail::require(X_.cols() >= 1, "signal batch: need at least one signal");
  Index n = 1;
  for (Index p : shape_) {
    detail::require(p >= 1, "signal batch: factor size must be positive");
    n *= p;
  }
  detail::require(n == X_.rows(), "signal batch: factor sizes multiply to " + std::to_string(n) +
                                      " but signals have length " + std::to_string(X_.rows()));
}

std::vector<Index> SignalBatch::extents() const { return {shape_.rbegin(), shape_.rend()}; }

namespace diffusion {

Matrix apply_filter(const Adjacency& W, const FilterSpec& h, const Matrix& Y) {
  return kernels::filter_parallel(W.weights(), h.coeffs(), Y);
}

SignalBatch generate_diffused(const Adjacency& W, const FilterSpec& h, Index T, std::uint64_t seed,
                              std::vector<Index> shape) {
  detail::require(T >= 1, "generate_diffused: need T >= 1");
  const Index N = W.nodes();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix Y(N, T);
  for (Index t = 0; t < T; ++t)
    for (Index i = 0; i < N; ++i) Y(i, t) = normal(rng);
  return SignalBatch(apply_filter(W, h, Y), std::move(shape));
}

double realized_snr_db(const Matrix& clean, const Matrix& noisy) {
  return 10.0 * std::log10(clean.squaredNorm() / (noisy - clean).squaredNorm());
}

SignalBatch add_noise_snr(const SignalBatch& batch, double snr_db, std::uint64_t seed, SnrMode mode) {
  const Matrix& X = batch.signals();
  detail::require(X.allFinite(), "add_noise_snr: non-finite signal");
  if (snr_db == kNoNoise) return batch;
  detail::require(std::isfinite(snr_db), "add_noise_snr: SNR must be finite or +inf");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix E(X.rows(), X.cols());
  for (Index t = 0; t < X.cols(); ++t)
    for (Index i = 0; i < X.rows(); ++i) E(i, t) = normal(rng);
  const double ratio = std::pow(10.0, snr_db / 10.0);  // signal power / noise power
  if (mode == SnrMode::Batch) {
    const double signal = X.squaredNorm();
    detail::require(signal > 0.0, "add_noise_snr: all-zero signal has no defined SNR");
    E *= std::sqrt(signal / (ratio * E.squaredNorm()));
  } else {
    for (Index t = 0; t < X.cols(); ++t) {
      const double signal = X.col(t).squaredNorm();
      detail::require(signal > 0.0, "add_noise_snr: all-zero signal column has no defined SNR");
      E.col(t) *= std::sqrt(signal / (ratio * E.col(t).squaredNorm()));
    }
  }
  return SignalBatch(X + E, batch.shape());
}

Matrix reshape_matrix(const Vector& x, Index Q, Index P) {
  detail::require(Q >= 1 && P >= 1 && Q * P == x.size(), "reshape_matrix: Q*P does not match signal length");
  return Eigen::Map<const Matrix>(x.data(), Q, P);
}

Vector vec(const Matrix& M) { return Eigen::Map<const Vector>(M.data(), M.size()); }

Tensor reshape_tensor(const Vector& x, std::span<const Index> factor_dims) {
  detail::require(!factor_dims.empty(), "reshape_tensor: no factor sizes");
  Tensor t;
  t.shape.assign(factor_dims.rbegin(), factor_dims.rend());
  detail::require(t.size() == x.size(), "reshape_tensor: factor sizes do not multiply to the signal length");
  t.data.assign(x.data(), x.data() + x.size());
  return t;
}

Vector vec(const Tensor& t) { return Eigen::Map<const Vector>(t.data.data(), static_cast<Index>(t.data.size())); }

namespace {

constexpr char kMagic[5] = {'P', 'G', 'S', 'B', '1'};

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    std::reverse(b, b + sizeof(T));
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

void put_u32(std::ostream& out, std::uint32_t v) {
  v = to_little(v);
  out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), sizeof v)) throw IoError("signal file: truncated header");
  return to_little(v);
}

std::uint32_t checked_u32(Index v) {
  detail::require(v >= 0 && v <= static_cast<Index>(UINT32_MAX), "signal file: dimension exceeds u32");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

void write_batch_binary(std::ostream& out, const SignalBatch& batch) {
  out.write(kMagic, sizeof kMagic);
  put_u32(out, checked_u32(static_cast<Index>(batch.shape().size())));
  for (Index p : batch.shape()) put_u32(out, checked_u32(p));
  put_u32(out, checked_u32(batch.count()));
  const Matrix& X = batch.signals();
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(X.data()), static_cast<std::streamsize>(X.size() * sizeof(double)));
  } else {
    for (Index i = 0; i < X.size(); ++i) {
      const double v = to_little(X.data()[i]);
      out.write(reinterpret_cast<const char*>(&v), sizeof v);
    }
  }
}

SignalBatch read_batch_binary(std::istream& in) {
  char magic[5];
  if (!in.read(magic, sizeof magic) || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw IoError("signal file: bad magic (expected PGSB1)");
  const std::uint32_t ndims = get_u32(in);
  if (ndims == 0 || ndims > 64) throw IoError("signal file: implausible dimension count");
  std::vector<Index> shape(ndims);
  Index N = 1;
  for (auto& p : shape) {
    p = get_u32(in);
    if (p == 0) throw IoError("signal file: zero factor size");
    N *= p;
  }
  const Index T = get_u32(in);
  if (T == 0) throw IoError("signal file: zero signals");
  Matrix X(N, T);
  if (!in.read(reinterpret_cast<char*>(X.data()), static_cast<std::streamsize>(X.size() * sizeof(double))))
    throw IoError("signal file: truncated payload");
  if constexpr (std::endian::native == std::endian::big)
    for (Index i = 0; i < X.size(); ++i) X.data()[i] = to_little(X.data()[i]);
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("signal file: trailing bytes");
  return SignalBatch(std::move(X), std::move(shape));
}

void write_batch_csv(std::ostream& out, const SignalBatch& batch) {
  out << "dims";
  for (Index p : batch.shape()) out << ',' << p;
  out << '\n' << std::setprecision(17);
  const Matrix& X = batch.signals();
  for (Index t = 0; t < X.cols(); ++t) {
    for (Index i = 0; i < X.rows(); ++i) out << (i ? "," : "") << X(i, t);
    out << '\n';
  }
}

SignalBatch read_batch_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw IoError("signal csv: empty file");
  std::vector<Index> shape;
  {
    std::stringstream ss(line);
    std::string cell;
    std::getline(ss, cell, ',');
    if (cell != "dims") throw IoError("signal csv: first line must start with 'dims'");
    while (std::getline(ss, cell, ',')) {
      try {
        shape.push_back(std::stoll(cell));
      } catch (const std::exception&) {
        throw IoError("signal csv: bad dimension '" + cell + "'");
      }
    }
  }
  if (shape.empty()) throw IoError("signal csv: no dimensions");
  Index N = 1;
  for (Index p : shape) N *= p;
  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    Index count = 0;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError("signal csv: bad value '" + cell + "'");
      }
      ++count;
    }
    if (count != N) throw IoError("signal csv: row " + std::to_string(rows + 1) + " has " + std::to_string(count) +
                                  " values, expected " + std::to_string(N));
    ++rows;
  }
  if (rows == 0) throw IoError("signal csv: no signals");
  return SignalBatch(Eigen::Map<Matrix>(values.data(), N, rows), std::move(shape));
}

void write_batch(const std::filesystem::path& path, const SignalBatch& batch) {
  const bool csv = path.extension() == ".csv";
  std::ofstream out(path, csv ? std::ios::out : std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  if (csv)
    write_batch_csv(out, batch);
  else
    write_batch_binary(out, batch);
  if (!out) throw IoError("write failed: " + path.string());
}

SignalBatch read_batch(const std::filesystem::path& path) {
  const bool csv = path.extension() == ".csv";
  std::ifstream in(path, csv ? std::ios::in : std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return csv ? read_batch_csv(in) : read_batch_binary(in);
}

}  // namespace diffusion
}  // namespace prodgraph
