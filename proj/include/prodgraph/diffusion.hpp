#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <span>
#include <vector>

#include "prodgraph/graphs.hpp"
#include "prodgraph/linalg.hpp"
#include "prodgraph/tensor.hpp"

namespace prodgraph {

// Polynomial graph filter H = sum_l h_l W^l.
class FilterSpec {
 public:
  explicit FilterSpec(std::vector<double> coeffs);
  const std::vector<double>& coeffs() const { return coeffs_; }
  // sum_l h_l x^l
  double response(double x) const;

 private:
  std::vector<double> coeffs_;
};

// T graph signals of length N as columns of X, with the factor sizes [P_1, ..., P_n]
// whose product is N. For two factors [P, Q], x_t = vec(X_t) with X_t of size Q x P.
class SignalBatch {
 public:
  SignalBatch() = default;
  SignalBatch(Matrix X, std::vector<Index> shape);

  const Matrix& signals() const { return X_; }
  const std::vector<Index>& shape() const { return shape_; }
  Index length() const { return X_.rows(); }
  Index count() const { return X_.cols(); }
  // Tensor axis extents, fastest first: {P_n, ..., P_1}.
  std::vector<Index> extents() const;

 private:
  Matrix X_;
  std::vector<Index> shape_;
};

namespace diffusion {

Matrix apply_filter(const Adjacency& W, const FilterSpec& h, const Matrix& Y);

// Columns x_t = H y_t with independent standard normal innovations y_t.
// shape defaults to {N} (a single factor).
SignalBatch generate_diffused(const Adjacency& W, const FilterSpec& h, Index T, std::uint64_t seed,
                              std::vector<Index> shape = {});

enum class SnrMode {
  Batch,     // ||X||_F^2 / ||E||_F^2 over the whole batch
  PerSignal  // the same ratio for every column separately
};

inline constexpr double kNoNoise = std::numeric_limits<double>::infinity();

// X + E with Gaussian E scaled so the realized SNR in dB equals snr_db exactly.
// snr_db = +inf returns X unchanged.
SignalBatch add_noise_snr(const SignalBatch& X, double snr_db, std::uint64_t seed, SnrMode mode = SnrMode::Batch);

// 10 log10(||X||^2 / ||noisy - X||^2)
double realized_snr_db(const Matrix& clean, const Matrix& noisy);

// Column-major unflatten of x into Q x P.
Matrix reshape_matrix(const Vector& x, Index Q, Index P);
Vector vec(const Matrix& M);

// x on factors [P_1..P_n] as a tensor of shape {P_n, ..., P_1}.
Tensor reshape_tensor(const Vector& x, std::span<const Index> factor_dims);
Vector vec(const Tensor& t);

// Binary format: "PGSB1", u32 n_dims, u32 dims[n_dims], u32 T, then N*T little-endian
// float64 values, column-major.
void write_batch_binary(std::ostream& out, const SignalBatch& batch);
SignalBatch read_batch_binary(std::istream& in);
// CSV: first line "dims,P_1,...,P_n", then one signal per line.
void write_batch_csv(std::ostream& out, const SignalBatch& batch);
SignalBatch read_batch_csv(std::istream& in);

// Dispatches on extension: ".csv" is CSV, anything else binary.
void write_batch(const std::filesystem::path& path, const SignalBatch& batch);
SignalBatch read_batch(const std::filesystem::path& path);

}  // namespace diffusion
}  // namespace prodgraph
