#include "stpuf/nist.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>

#include <boost/math/special_functions/gamma.hpp>
#include <fftw3.h>

#include "stpuf/error.hpp"
#include "stpuf/keyed_rng.hpp"

namespace stpuf {

namespace {

NistResult make(std::string name, double p, double alpha) {
  NistResult r;
  r.test_name = std::move(name);
  r.p_value = std::clamp(p, 0.0, 1.0);
  r.pass = r.p_value >= alpha;
  return r;
}

NistResult insufficient(std::string name) {
  NistResult r;
  r.test_name = std::move(name);
  r.insufficient_data = true;
  return r;
}

int floor_log2(std::size_t n) {
  int k = -1;
  while (n) {
    n >>= 1;
    ++k;
  }
  return k;
}

// Frequency of every overlapping m-bit pattern, wrapping around the end.
std::vector<std::uint64_t> pattern_counts(std::span<const std::uint8_t> bits, int m) {
  std::vector<std::uint64_t> counts(std::size_t{1} << m, 0);
  if (m == 0) return counts;
  const std::size_t n = bits.size();
  const std::uint32_t mask = (1u << m) - 1u;
  std::uint32_t v = 0;
  for (int k = 0; k < m - 1; ++k) v = (v << 1) | bits[static_cast<std::size_t>(k) % n];
  for (std::size_t i = 0; i < n; ++i) {
    v = ((v << 1) | bits[(i + static_cast<std::size_t>(m) - 1) % n]) & mask;
    ++counts[v];
  }
  return counts;
}

double psi_squared(std::span<const std::uint8_t> bits, int m) {
  if (m <= 0) return 0.0;
  const auto counts = pattern_counts(bits, m);
  double sum = 0.0;
  for (auto c : counts) sum += static_cast<double>(c) * static_cast<double>(c);
  const auto n = static_cast<double>(bits.size());
  return sum * std::ldexp(1.0, m) / n - n;
}

}  // namespace

double igamc(double a, double x) {
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(a, x);
}

const std::vector<std::string>& nist_test_names() {
  static const std::vector<std::string> names = {
      "Frequency",      "BlockFrequency", "Runs",
      "LongestRun",     "CumulativeSums", "Spectral",
      "Serial",         "ApproximateEntropy", "NonOverlappingTemplate"};
  return names;
}

NistResult frequency_test(std::span<const std::uint8_t> bits, double alpha) {
  const std::size_t n = bits.size();
  if (n < 100) return insufficient("Frequency");
  long long s = 0;
  for (auto b : bits) s += b ? 1 : -1;
  const double s_obs = std::abs(static_cast<double>(s)) / std::sqrt(static_cast<double>(n));
  return make("Frequency", std::erfc(s_obs / std::numbers::sqrt2), alpha);
}

NistResult block_frequency_test(std::span<const std::uint8_t> bits, int block_size, double alpha) {
  const std::size_t n = bits.size();
  if (n < 100 || block_size < 1 || n < static_cast<std::size_t>(block_size))
    return insufficient("BlockFrequency");
  const auto m = static_cast<std::size_t>(block_size);
  const std::size_t blocks = n / m;
  double chi2 = 0.0;
  for (std::size_t b = 0; b < blocks; ++b) {
    std::size_t ones = 0;
    for (std::size_t j = 0; j < m; ++j) ones += bits[b * m + j];
    const double pi = static_cast<double>(ones) / static_cast<double>(m) - 0.5;
    chi2 += pi * pi;
  }
  chi2 *= 4.0 * static_cast<double>(m);
  return make("BlockFrequency", igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0), alpha);
}

NistResult runs_test(std::span<const std::uint8_t> bits, double alpha) {
  const std::size_t n = bits.size();
  if (n < 100) return insufficient("Runs");
  std::size_t ones = 0;
  for (auto b : bits) ones += b;
  const double nn = static_cast<double>(n);
  const double pi = static_cast<double>(ones) / nn;
  if (std::abs(pi - 0.5) >= 2.0 / std::sqrt(nn)) return make("Runs", 0.0, alpha);
  std::size_t v = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) v += bits[k] != bits[k + 1];
  const double num = std::abs(static_cast<double>(v) - 2.0 * nn * pi * (1.0 - pi));
  const double den = 2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi);
  return make("Runs", std::erfc(num / den), alpha);
}

NistResult longest_run_test(std::span<const std::uint8_t> bits, double alpha) {
  const std::size_t n = bits.size();
  if (n < 128) return insufficient("LongestRun");
  std::size_t block;
  std::vector<int> classes;
  std::vector<double> pi;
  if (n < 6272) {
    block = 8;
    classes = {1, 2, 3, 4};
    pi = {0.21484375, 0.3671875, 0.23046875, 0.1875};
  } else if (n < 750000) {
    block = 128;
    classes = {4, 5, 6, 7, 8, 9};
    pi = {0.1174035788, 0.242955959, 0.249363483, 0.17517706, 0.102701071, 0.112398847};
  } else {
    block = 10000;
    classes = {10, 11, 12, 13, 14, 15, 16};
    pi = {0.0882, 0.2092, 0.2483, 0.1933, 0.1208, 0.0675, 0.0727};
  }
  const std::size_t k = classes.size() - 1;
  const std::size_t blocks = n / block;
  std::vector<double> nu(classes.size(), 0.0);
  for (std::size_t b = 0; b < blocks; ++b) {
    int run = 0;
    int longest = 0;
    for (std::size_t j = 0; j < block; ++j) {
      if (bits[b * block + j]) {
        longest = std::max(longest, ++run);
      } else {
        run = 0;
      }
    }
    if (longest <= classes.front()) nu.front() += 1.0;
    else if (longest >= classes.back()) nu.back() += 1.0;
    else nu[static_cast<std::size_t>(longest - classes.front())] += 1.0;
  }
  double chi2 = 0.0;
  const auto nb = static_cast<double>(blocks);
  for (std::size_t i = 0; i <= k; ++i) chi2 += (nu[i] - nb * pi[i]) * (nu[i] - nb * pi[i]) / (nb * pi[i]);
  return make("LongestRun", igamc(static_cast<double>(k) / 2.0, chi2 / 2.0), alpha);
}

std::vector<NistResult> cumulative_sums_test(std::span<const std::uint8_t> bits, double alpha) {
  const std::size_t n = bits.size();
  if (n < 100) return {insufficient("CumulativeSums/forward"), insufficient("CumulativeSums/reverse")};
  auto p_value = [&](bool reverse) {
    long long s = 0;
    long long z = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s += bits[reverse ? n - 1 - i : i] ? 1 : -1;
      z = std::max(z, s < 0 ? -s : s);
    }
    const auto nn = static_cast<long long>(n);
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    const double zd = static_cast<double>(z);
    // Summation bounds use truncating integer division.
    double sum1 = 0.0;
    for (long long k = (-nn / z + 1) / 4; k <= (nn / z - 1) / 4; ++k)
      sum1 += normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n) -
              normal_cdf(static_cast<double>(4 * k - 1) * zd / sqrt_n);
    double sum2 = 0.0;
    for (long long k = (-nn / z - 3) / 4; k <= (nn / z - 1) / 4; ++k)
      sum2 += normal_cdf(static_cast<double>(4 * k + 3) * zd / sqrt_n) -
              normal_cdf(static_cast<double>(4 * k + 1) * zd / sqrt_n);
    return 1.0 - sum1 + sum2;
  };
  return {make("CumulativeSums/forward", p_value(false), alpha),
          make("CumulativeSums/reverse", p_value(true), alpha)};
}

NistResult spectral_test(std::span<const std::uint8_t> bits, double alpha) {
  const std::size_t n = bits.size();
  if (n < 1000) return insufficient("Spectral");
  std::vector<double> in(n);
  for (std::size_t i = 0; i < n; ++i) in[i] = bits[i] ? 1.0 : -1.0;
  std::vector<std::complex<double>> out(n / 2 + 1);
  fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                        reinterpret_cast<fftw_complex*>(out.data()), FFTW_ESTIMATE);
  if (!plan) fail(ErrorCategory::Internal, "spectral test: FFT planning failed");
  fftw_execute(plan);
  fftw_destroy_plan(plan);
  const double nn = static_cast<double>(n);
  const double threshold = std::sqrt(std::log(1.0 / 0.05) * nn);
  std::size_t below = 0;
  for (std::size_t i = 0; i < n / 2; ++i) below += std::abs(out[i]) < threshold;
  const double expected = 0.95 * nn / 2.0;
  const double d = (static_cast<double>(below) - expected) / std::sqrt(nn * 0.95 * 0.05 / 4.0);
  return make("Spectral", std::erfc(std::abs(d) / std::numbers::sqrt2), alpha);
}

std::vector<NistResult> serial_test(std::span<const std::uint8_t> bits, int m, double alpha) {
  const std::size_t n = bits.size();
  const int m_eff = n == 0 ? 0 : std::min(m, floor_log2(n) - 3);
  if (n < 100 || m_eff < 3) return {insufficient("Serial/p1"), insufficient("Serial/p2")};
  const double p0 = psi_squared(bits, m_eff);
  const double p1 = psi_squared(bits, m_eff - 1);
  const double p2 = psi_squared(bits, m_eff - 2);
  const double del1 = p0 - p1;
  const double del2 = p0 - 2.0 * p1 + p2;
  return {make("Serial/p1", igamc(std::ldexp(1.0, m_eff - 2), del1 / 2.0), alpha),
          make("Serial/p2", igamc(std::ldexp(1.0, m_eff - 3), del2 / 2.0), alpha)};
}

NistResult approximate_entropy_test(std::span<const std::uint8_t> bits, int m, double alpha) {
  const std::size_t n = bits.size();
  const int m_eff = n == 0 ? 0 : std::min(m, floor_log2(n) - 6);
  if (n < 100 || m_eff < 2) return insufficient("ApproximateEntropy");
  const double nn = static_cast<double>(n);
  auto phi = [&](int len) {
    double sum = 0.0;
    for (auto c : pattern_counts(bits, len)) {
      if (c == 0) continue;
      const double p = static_cast<double>(c) / nn;
      sum += p * std::log(p);
    }
    return sum;
  };
  const double apen = phi(m_eff) - phi(m_eff + 1);
  const double chi2 = 2.0 * nn * (std::numbers::ln2 - apen);
  return make("ApproximateEntropy", igamc(std::ldexp(1.0, m_eff - 1), chi2 / 2.0), alpha);
}

NistResult non_overlapping_template_test(std::span<const std::uint8_t> bits,
                                         const std::string& template_bits, int blocks,
                                         double alpha) {
  const std::string name = "NonOverlappingTemplate";
  require(!template_bits.empty() && template_bits.size() <= 21 &&
              template_bits.find_first_not_of("01") == std::string::npos,
          "template must be a non-empty string of 0/1 characters");
  require(blocks >= 1, "template test needs at least one block");
  const std::size_t m = template_bits.size();
  const std::size_t n = bits.size();
  const std::size_t block = n / static_cast<std::size_t>(blocks);
  if (n < 100 || block < 2 * m) return insufficient(name);
  std::vector<std::uint8_t> pattern(m);
  for (std::size_t i = 0; i < m; ++i) pattern[i] = template_bits[i] == '1';

  const double md = static_cast<double>(m);
  const double mu = (static_cast<double>(block) - md + 1.0) / std::ldexp(1.0, static_cast<int>(m));
  const double var = static_cast<double>(block) *
                     (1.0 / std::ldexp(1.0, static_cast<int>(m)) -
                      (2.0 * md - 1.0) / std::ldexp(1.0, 2 * static_cast<int>(m)));
  double chi2 = 0.0;
  for (int b = 0; b < blocks; ++b) {
    const std::size_t base = static_cast<std::size_t>(b) * block;
    std::size_t w = 0;
    std::size_t i = 0;
    while (i + m <= block) {
      if (std::equal(pattern.begin(), pattern.end(), bits.begin() + static_cast<std::ptrdiff_t>(base + i))) {
        ++w;
        i += m;
      } else {
        ++i;
      }
    }
    chi2 += (static_cast<double>(w) - mu) * (static_cast<double>(w) - mu) / var;
  }
  return make(name, igamc(static_cast<double>(blocks) / 2.0, chi2 / 2.0), alpha);
}

std::vector<NistResult> nist_suite(std::span<const std::uint8_t> bits, const NistParams& p) {
  const double a = p.significance;
  std::vector<NistResult> out;
  out.push_back(frequency_test(bits, a));
  out.push_back(block_frequency_test(bits, p.block_frequency_m, a));
  out.push_back(runs_test(bits, a));
  out.push_back(longest_run_test(bits, a));
  for (auto& r : cumulative_sums_test(bits, a)) out.push_back(std::move(r));
  out.push_back(spectral_test(bits, a));
  for (auto& r : serial_test(bits, p.serial_m, a)) out.push_back(std::move(r));
  out.push_back(approximate_entropy_test(bits, p.approximate_entropy_m, a));
  out.push_back(non_overlapping_template_test(bits, p.template_bits, p.template_blocks, a));
  return out;
}

}  // namespace stpuf
