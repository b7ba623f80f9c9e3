#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stpuf {

// Subset of the SP800-22 battery. Tests that yield two statistics
// (cumulative sums, serial) report one row per statistic.
//
// Minimum lengths: frequency, runs and cumulative sums need 100 bits; block
// frequency needs 100 bits and at least one block; longest run needs 128;
// spectral needs 1000; serial and approximate entropy shrink m to fit the
// stream and need m >= 3 and m >= 2 respectively; the template test needs
// blocks of at least twice the template length.
struct NistParams {
  double significance = 0.01;
  int block_frequency_m = 128;
  int serial_m = 16;
  int approximate_entropy_m = 10;
  std::string template_bits = "000000001";
  int template_blocks = 8;
};

struct NistResult {
  std::string test_name;
  double p_value = 0.0;
  bool pass = false;
  bool insufficient_data = false;
};

NistResult frequency_test(std::span<const std::uint8_t> bits, double alpha = 0.01);
NistResult block_frequency_test(std::span<const std::uint8_t> bits, int block_size, double alpha = 0.01);
NistResult runs_test(std::span<const std::uint8_t> bits, double alpha = 0.01);
NistResult longest_run_test(std::span<const std::uint8_t> bits, double alpha = 0.01);
std::vector<NistResult> cumulative_sums_test(std::span<const std::uint8_t> bits, double alpha = 0.01);
NistResult spectral_test(std::span<const std::uint8_t> bits, double alpha = 0.01);
std::vector<NistResult> serial_test(std::span<const std::uint8_t> bits, int m, double alpha = 0.01);
NistResult approximate_entropy_test(std::span<const std::uint8_t> bits, int m, double alpha = 0.01);
NistResult non_overlapping_template_test(std::span<const std::uint8_t> bits,
                                         const std::string& template_bits, int blocks,
                                         double alpha = 0.01);

std::vector<NistResult> nist_suite(std::span<const std::uint8_t> bits, const NistParams& params = {});

// Names of the nine tests, in suite order.
const std::vector<std::string>& nist_test_names();

// Upper regularized incomplete gamma function Q(a, x).
double igamc(double a, double x);

}  // namespace stpuf
