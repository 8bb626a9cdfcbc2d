#include "hdsvm/simgen.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include <Eigen/Cholesky>

#include "hdsvm/error.hpp"

namespace hdsvm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string num(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::ConfigError, "bad number '" + s + "' in " + context);
  }
  return v;
}

std::pair<std::string, std::string> split_kind(const std::string& text) {
  auto pos = text.find(':');
  if (pos == std::string::npos) return {text, {}};
  return {text.substr(0, pos), text.substr(pos + 1)};
}

bool is_power_of_two(double v) {
  if (v < 1.0 || v != std::floor(v)) return false;
  auto n = static_cast<unsigned long long>(v);
  return (n & (n - 1)) == 0;
}

}  // namespace

// --- descriptions and parsing -----------------------------------------------

std::string describe(const MeanSpec& spec) {
  return std::visit(overloaded{
                        [](const mean::Zero&) { return std::string("zero"); },
                        [](const mean::Constant& m) { return "constant:" + num(m.value); },
                        [](const mean::Alpha& m) {
                          return m.use_d_star ? std::string("alpha:dstar") : "alpha:" + std::to_string(m.t);
                        },
                        [](const mean::Beta& m) { return "beta:" + num(m.t); },
                        [](const mean::Explicit& m) { return "explicit[" + std::to_string(m.values.size()) + "]"; },
                    },
                    spec);
}

std::string describe(const CovarianceSpec& spec) {
  return std::visit(overloaded{
                        [](const cov::ScaledIdentity& c) { return "identity:" + num(c.c); },
                        [](const cov::Structured& c) { return "structured:" + num(c.rho); },
                    },
                    spec);
}

std::string describe(const Family& family) {
  return family.kind == Family::Kind::Gaussian ? std::string("gaussian") : "t:" + std::to_string(family.df);
}

MeanSpec parse_mean_spec(const std::string& text) {
  const auto [kind, arg] = split_kind(text);
  if (kind == "zero") return mean::Zero{};
  if (kind == "constant") return mean::Constant{parse_double(arg, "mean spec")};
  if (kind == "alpha") {
    if (arg == "dstar") return mean::Alpha{0, true};
    return mean::Alpha{static_cast<long>(parse_double(arg, "mean spec")), false};
  }
  if (kind == "beta") return mean::Beta{parse_double(arg, "mean spec")};
  if (kind == "explicit") {
    std::ifstream in(arg);
    if (!in) throw Error(ErrorKind::IoError, "cannot open mean vector file " + arg);
    std::vector<double> v;
    std::string tok;
    while (in >> tok) v.push_back(parse_double(tok, arg));
    return mean::Explicit{Eigen::Map<Vector>(v.data(), static_cast<Index>(v.size()))};
  }
  throw Error(ErrorKind::ConfigError, "unknown mean spec '" + text + "'");
}

CovarianceSpec parse_covariance_spec(const std::string& text) {
  const auto [kind, arg] = split_kind(text);
  if (kind == "identity" || kind == "scaled_identity") {
    return cov::ScaledIdentity{arg.empty() ? 1.0 : parse_double(arg, "covariance spec")};
  }
  if (kind == "structured") return cov::Structured{parse_double(arg, "covariance spec")};
  throw Error(ErrorKind::ConfigError, "unknown covariance spec '" + text + "'");
}

Family parse_family(const std::string& text) {
  const auto [kind, arg] = split_kind(text);
  if (kind == "gaussian" || kind == "normal") return Family::gaussian();
  if (kind == "t" || kind == "student_t") {
    const double df = parse_double(arg, "family");
    if (df != std::floor(df)) throw Error(ErrorKind::ConfigError, "degrees of freedom must be an integer");
    return Family::student_t(static_cast<int>(df));
  }
  throw Error(ErrorKind::ConfigError, "unknown family '" + text + "'");
}

// --- means ---------------------------------------------------------------------

long d_star(long d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be positive");
  // smallest k with k >= d^{2/3} / 2, i.e. 8 k^3 >= d^2
  const auto d2 = static_cast<unsigned long long>(d) * static_cast<unsigned long long>(d);
  auto k = static_cast<unsigned long long>(std::floor(std::cbrt(static_cast<double>(d2) / 8.0)));
  while (k > 0 && 8ULL * (k - 1) * (k - 1) * (k - 1) >= d2) --k;
  while (8ULL * k * k * k < d2) ++k;
  return static_cast<long>(2 * k);
}

Vector mean_vector(const MeanSpec& spec, Index d) {
  return std::visit(
      overloaded{
          [d](const mean::Zero&) -> Vector { return Vector::Zero(d); },
          [d](const mean::Constant& m) -> Vector { return Vector::Constant(d, m.value); },
          [d](const mean::Alpha& m) -> Vector {
            const long t = m.use_d_star ? d_star(static_cast<long>(d)) : m.t;
            if (t <= 0 || t % 2 != 0 || t > d) {
              throw Error(ErrorKind::InvalidT, "mu_alpha needs an even 0 < t <= d (t=" + std::to_string(t) +
                                                   ", d=" + std::to_string(d) + ")");
            }
            Vector v = Vector::Zero(d);
            v.head(t / 2).setOnes();
            v.tail(t / 2).setConstant(-1.0);
            return v;
          },
          [d](const mean::Beta& m) -> Vector {
            if (!(m.t > 0.0) || d < 4) throw Error(ErrorKind::InvalidT, "mu_beta needs t > 0 and d >= 4");
            Vector v = Vector::Zero(d);
            const double h = std::sqrt(m.t) / 2.0;
            v.head(2).setConstant(h);
            v.tail(2).setConstant(-h);
            return v;
          },
          [d](const mean::Explicit& m) -> Vector {
            if (m.values.size() != d) {
              throw Error(ErrorKind::DimensionMismatch, "explicit mean has length " +
                                                            std::to_string(m.values.size()) + ", d is " +
                                                            std::to_string(d));
            }
            return m.values;
          },
      },
      spec);
}

// --- covariance ------------------------------------------------------------------

CovarianceFactor CovarianceFactor::identity(Index d, double c) {
  CovarianceFactor f;
  f.dim_ = d;
  f.scale_ = std::sqrt(c);
  f.trace_ = c * static_cast<double>(d);
  f.trace_sq_ = c * c * static_cast<double>(d);
  return f;
}

CovarianceFactor CovarianceFactor::from_dense(const Matrix& sigma) {
  CovarianceFactor f;
  f.dim_ = sigma.rows();
  long double tr = 0.0L;
  for (Index j = 0; j < sigma.rows(); ++j) tr += sigma(j, j);
  f.trace_ = static_cast<double>(tr);
  f.trace_sq_ = sigma.squaredNorm();

  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    Matrix jittered = sigma;
    jittered.diagonal().array() += 1e-12;
    llt.compute(jittered);
    if (llt.info() != Eigen::Success) {
      throw Error(ErrorKind::FactorizationFailure, "covariance is not positive definite");
    }
  }
  f.lower_ = llt.matrixL();
  return f;
}

Matrix CovarianceFactor::apply(const Matrix& z) const {
  if (is_scaled_identity()) return scale_ * z;
  return lower_.triangularView<Eigen::Lower>() * z;
}

Matrix dense_covariance(const CovarianceSpec& spec, Index d) {
  return std::visit(overloaded{
                        [d](const cov::ScaledIdentity& c) -> Matrix {
                          return c.c * Matrix::Identity(d, d);
                        },
                        [d](const cov::Structured& c) -> Matrix {
                          Vector b(d);
                          for (Index j = 0; j < d; ++j) {
                            b[j] = std::sqrt(0.5 + static_cast<double>(j + 1) / static_cast<double>(d + 1));
                          }
                          Matrix s(d, d);
                          for (Index k = 0; k < d; ++k) {
                            for (Index j = 0; j < d; ++j) {
                              const double lag = std::cbrt(static_cast<double>(std::abs(j - k)));
                              s(j, k) = b[j] * b[k] * std::pow(c.rho, lag);
                            }
                          }
                          return s;
                        },
                    },
                    spec);
}

namespace {

void validate(const CovarianceSpec& spec) {
  std::visit(overloaded{
                 [](const cov::ScaledIdentity& c) {
                   if (!(c.c > 0.0)) throw Error(ErrorKind::ConfigError, "identity scale must be positive");
                 },
                 [](const cov::Structured& c) {
                   if (!(c.rho > 0.0 && c.rho < 1.0)) {
                     throw Error(ErrorKind::ConfigError, "structured covariance needs 0 < rho < 1");
                   }
                 },
             },
             spec);
}

}  // namespace

std::shared_ptr<const CovarianceFactor> build_covariance(const CovarianceSpec& spec, Index d) {
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "d must be positive");
  validate(spec);
  if (const auto* id = std::get_if<cov::ScaledIdentity>(&spec)) {
    return std::make_shared<const CovarianceFactor>(CovarianceFactor::identity(d, id->c));
  }

  static std::mutex mutex;
  static std::map<std::string, std::shared_ptr<const CovarianceFactor>> cache;
  const std::string key = describe(spec) + "@" + std::to_string(d);
  std::lock_guard lock(mutex);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto f = std::make_shared<const CovarianceFactor>(CovarianceFactor::from_dense(dense_covariance(spec, d)));
  cache.emplace(key, f);
  return f;
}

Matrix sample_population(const PopulationSpec& spec, Index n, Index d, std::mt19937_64& rng) {
  if (n < 1) throw Error(ErrorKind::InvalidArgument, "sample size must be positive");
  const bool student = spec.family.kind == Family::Kind::StudentT;
  if (student && spec.family.df <= 2) {
    throw Error(ErrorKind::InvalidDf, "Student-t needs df > 2 for a finite covariance");
  }
  const Vector mu = mean_vector(spec.mean, d);
  const auto factor = build_covariance(spec.covariance, d);

  std::normal_distribution<double> normal;
  std::chi_squared_distribution<double> chi2(student ? spec.family.df : 1);
  Matrix z(d, n);
  Vector mix = Vector::Ones(n);
  for (Index j = 0; j < n; ++j) {
    for (Index f = 0; f < d; ++f) z(f, j) = normal(rng);
    if (student) mix[j] = std::sqrt((spec.family.df - 2.0) / chi2(rng));
  }
  Matrix x = factor->apply(z);
  if (student) x *= mix.asDiagonal();
  x.colwise() += mu;
  return x;
}

// --- scenarios -------------------------------------------------------------------

std::vector<double> default_grid(char name) {
  std::vector<double> g;
  switch (name) {
    case 'a':
    case 'b':
    case 'c':
      for (int s = 5; s <= 11; ++s) g.push_back(std::ldexp(1.0, s));
      break;
    case 'd':
      for (int s = 6; s <= 12; ++s) g.push_back(std::ldexp(1.0, s));
      break;
    case 'e':
    case 'f':
    case 'g':
      for (int s = 1; s <= 7; ++s) g.push_back(s);
      break;
    default:
      throw Error(ErrorKind::UnknownScenario, std::string("no scenario '") + name + "'");
  }
  return g;
}

ScenarioPoint scenario(char name, double v) {
  ScenarioPoint p;
  p.name = name;
  p.sweep_value = v;
  const PopulationSpec origin_identity{mean::Zero{}, cov::ScaledIdentity{1.0}, Family::gaussian()};
  const mean::Constant third{1.0 / 3.0};

  auto require_dim = [&] {
    if (!is_power_of_two(v) || v < 4.0) {
      throw Error(ErrorKind::SweepOutOfGrid,
                  std::string("scenario ") + name + " sweeps d over powers of two >= 4, got " + num(v));
    }
    p.dim = static_cast<Index>(v);
  };
  auto require_s = [&] {
    if (v != std::floor(v) || v < 1.0 || v > 7.0) {
      throw Error(ErrorKind::SweepOutOfGrid,
                  std::string("scenario ") + name + " sweeps s over 1..7, got " + num(v));
    }
  };

  switch (name) {
    case 'a':
      require_dim();
      p.populations = {origin_identity, {third, cov::ScaledIdentity{1.0}, Family::gaussian()}};
      p.sizes = {10, 10};
      break;
    case 'b':
      require_dim();
      p.populations = {origin_identity, {third, cov::ScaledIdentity{1.0}, Family::gaussian()}};
      p.sizes = {6, 14};
      break;
    case 'c':
      require_dim();
      p.populations = {{mean::Zero{}, cov::ScaledIdentity{0.6}, Family::gaussian()},
                       {third, cov::ScaledIdentity{1.4}, Family::gaussian()}};
      p.sizes = {10, 10};
      break;
    case 'd':
      require_dim();
      p.populations = {{mean::Zero{}, cov::Structured{0.3}, Family::gaussian()},
                       {mean::Alpha{d_star(static_cast<long>(p.dim)), false}, cov::Structured{0.4},
                        Family::gaussian()}};
      p.sizes = {5, 25};
      break;
    case 'e': {
      require_s();
      p.dim = 1000;
      const auto s = static_cast<Index>(v);
      p.populations = {{mean::Zero{}, cov::Structured{0.3}, Family::student_t(10)},
                       {mean::Alpha{d_star(1000), false}, cov::Structured{0.4}, Family::student_t(10)}};
      p.sizes = {4 * s, 8 * s};
      break;
    }
    case 'f':
    case 'g': {
      require_s();
      p.dim = 1000;
      const double t = std::ldexp(1.0, static_cast<int>(v));
      MeanSpec mu2 = name == 'f' ? MeanSpec{mean::Alpha{static_cast<long>(t), false}} : MeanSpec{mean::Beta{t}};
      p.populations = {{mean::Zero{}, cov::Structured{0.3}, Family::student_t(10)},
                       {mu2, cov::Structured{0.4}, Family::student_t(10)}};
      p.sizes = {10, 20};
      break;
    }
    default:
      throw Error(ErrorKind::UnknownScenario, std::string("no scenario '") + name + "'");
  }
  return p;
}

// --- diagnostics -------------------------------------------------------------------

AssumptionReport assumption_diagnostics(const PopulationSpec& first, const PopulationSpec& second, Index n1,
                                        Index n2, Index d, long mc_draws, std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) throw Error(ErrorKind::InvalidArgument, "sample sizes must be positive");
  AssumptionReport r;
  r.delta = (mean_vector(first.mean, d) - mean_vector(second.mean, d)).squaredNorm();
  const std::array<const PopulationSpec*, 2> pops{&first, &second};
  std::mt19937_64 rng(seed);

  for (std::size_t i = 0; i < 2; ++i) {
    const auto factor = build_covariance(pops[i]->covariance, d);
    r.trace[i] = factor->trace();
    r.trace_sq[i] = factor->trace_of_square();
    if (pops[i]->family.kind == Family::Kind::Gaussian) {
      r.var_norm[i] = 2.0 * r.trace_sq[i];
    } else {
      r.method = AssumptionReport::Method::MonteCarlo;
      PopulationSpec centred = *pops[i];
      centred.mean = mean::Zero{};
      constexpr Index kBatch = 1000;
      double mean = 0.0, m2 = 0.0;
      long count = 0;
      for (long done = 0; done < mc_draws; done += kBatch) {
        const Index batch = static_cast<Index>(std::min<long>(kBatch, mc_draws - done));
        const Vector norms = sample_population(centred, batch, d, rng).colwise().squaredNorm();
        for (Index k = 0; k < batch; ++k) {
          ++count;
          const double delta = norms[k] - mean;
          mean += delta / static_cast<double>(count);
          m2 += delta * (norms[k] - mean);
        }
      }
      r.var_norm[i] = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    }
  }
  const double dn1 = static_cast<double>(n1), dn2 = static_cast<double>(n2);
  r.kappa = r.trace[0] / dn1 - r.trace[1] / dn2;
  r.delta_small = r.trace[0] / dn1 + r.trace[1] / dn2;
  r.delta_star = r.delta + r.delta_small;
  const double d2 = r.delta * r.delta;
  for (std::size_t i = 0; i < 2; ++i) {
    r.ratio_a_i[i] = r.var_norm[i] / d2;
    r.ratio_a_ii[i] = r.trace_sq[i] / d2;
  }
  r.ratio_a_iii = std::abs(r.kappa) / r.delta;
  r.kappa_over_delta = r.kappa / r.delta;
  return r;
}

}  // namespace hdsvm
