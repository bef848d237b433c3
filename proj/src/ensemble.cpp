#include "bellfield/ensemble.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>
#include <random>

#include "bellfield/errors.hpp"
#include "bellfield/parallel.hpp"

namespace bellfield {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

void validate(const EnsembleParams &params, double intensity) {
  if (!(intensity > 0.0) || !std::isfinite(intensity))
    throw InvalidArgument("ensemble intensity must be positive");
  if (params.n_realizations == 0)
    throw InvalidArgument("ensemble needs at least one realization");
  if (params.samples_per_realization == 0)
    throw InvalidArgument("ensemble needs at least one sample per realization");
}

} // namespace

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

FieldEnsemble::FieldEnsemble(EnsembleParams params, SchmidtPair schmidt, double intensity,
                             SampleMatrix processes)
    : params_(params), schmidt_(schmidt), intensity_(intensity), processes_(std::move(processes)) {
  validate(params_, intensity_);
  if (static_cast<std::size_t>(processes_.rows()) != params_.total_samples())
    throw InvalidArgument("sample count does not match ensemble parameters");
  const double amp = std::sqrt(intensity_);
  field_.resize(processes_.rows(), 2);
  field_.col(0) = (amp * schmidt_.kappa1()) * processes_.col(0);
  field_.col(1) = (amp * schmidt_.kappa2()) * processes_.col(1);
}

FieldEnsemble FieldEnsemble::slice(std::size_t first, std::size_t count) const {
  if (count == 0 || first + count > params_.n_realizations)
    throw InvalidArgument("realization slice out of range");
  EnsembleParams p = params_;
  p.n_realizations = count;
  const auto rows = static_cast<Eigen::Index>(params_.samples_per_realization);
  return FieldEnsemble(p, schmidt_, intensity_,
                       processes_.middleRows(static_cast<Eigen::Index>(first) * rows,
                                             static_cast<Eigen::Index>(count) * rows));
}

FieldEnsemble generate(const SchmidtPair &schmidt, double intensity, const EnsembleParams &params,
                       unsigned workers) {
  validate(params, intensity);
  const auto per = static_cast<Eigen::Index>(params.samples_per_realization);
  SampleMatrix processes(static_cast<Eigen::Index>(params.total_samples()), 2);
  // Circular Gaussian with <|f|^2> = 1: real and imaginary parts N(0, 1/2).
  const double sigma = std::sqrt(0.5);
  parallel_for(params.n_realizations, workers, [&](std::size_t r) {
    std::mt19937_64 rng(substream_seed(params.seed, r));
    std::normal_distribution<double> normal(0.0, sigma);
    const Eigen::Index base = static_cast<Eigen::Index>(r) * per;
    for (Eigen::Index t = 0; t < per; ++t) {
      for (Eigen::Index c = 0; c < 2; ++c) {
        const double re = normal(rng);
        const double im = normal(rng);
        processes(base + t, c) = Complex(re, im);
      }
    }
  });
  return FieldEnsemble(params, schmidt, intensity, std::move(processes));
}

ComplexEstimate inner_estimate(const Eigen::Ref<const Eigen::VectorXcd> &g1,
                               const Eigen::Ref<const Eigen::VectorXcd> &g2) {
  if (g1.size() != g2.size() || g1.size() == 0)
    throw InvalidArgument("inner product needs two equal, non-empty sample sets");
  const Eigen::VectorXcd z = g1.conjugate().cwiseProduct(g2);
  const auto n = static_cast<double>(z.size());
  const Complex mean = z.mean();
  double var = 0.0;
  if (z.size() > 1)
    var = (z.array() - mean).abs2().sum() / (n - 1.0);
  return {mean, std::sqrt(var / n)};
}

ComplexEstimate correlator_estimate(const FieldEnsemble &e, Axis i, Axis j) {
  return inner_estimate(e.field().col(static_cast<int>(j)), e.field().col(static_cast<int>(i)));
}

Complex empirical_correlator(const FieldEnsemble &e, Axis i, Axis j) {
  return correlator_estimate(e, i, j).value;
}

Eigen::Matrix2cd coherence_matrix(const FieldEnsemble &e) {
  const auto n = static_cast<double>(e.size());
  // (E^T E*)(i, j) = sum_t E_i conj(E_j)
  return (e.field().transpose() * e.field().conjugate()) / n;
}

Eigen::VectorXcd basis_process(const FieldEnsemble &e, const FunBasisLabel &label) {
  if (label.index != 1 && label.index != 2)
    throw InvalidArgument("function basis index must be 1 or 2");
  // Row `index` of the rotation gives the coordinates of |f_index^b> on f1, f2.
  const Eigen::Matrix2d r = rotation(label.rotation);
  const int row = label.index - 1;
  return r(row, 0) * e.processes().col(0) + r(row, 1) * e.processes().col(1);
}

ComplexEstimate fun_inner_estimate(const FieldEnsemble &e, const FunBasisLabel &label1,
                                   const FunBasisLabel &label2) {
  return inner_estimate(basis_process(e, label1), basis_process(e, label2));
}

Complex empirical_fun_inner(const FieldEnsemble &e, const FunBasisLabel &label1,
                            const FunBasisLabel &label2) {
  return fun_inner_estimate(e, label1, label2).value;
}

void write_samples(std::ostream &os, const FieldEnsemble &e) {
  const auto &f = e.field();
  os << std::setprecision(17);
  for (Eigen::Index t = 0; t < f.rows(); ++t)
    os << f(t, 0).real() << ' ' << f(t, 0).imag() << ' ' << f(t, 1).real() << ' '
       << f(t, 1).imag() << '\n';
}

} // namespace bellfield
