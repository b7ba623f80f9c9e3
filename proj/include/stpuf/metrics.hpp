#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "stpuf/arbiter_puf.hpp"

namespace stpuf {

using BitVector = std::vector<std::uint8_t>;  // one 0/1 entry per bit

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

enum class HdKind { Intra, Inter };

struct HdReport {
  double mean = 0.0;   // fraction of response length
  double sigma = 0.0;  // sample standard deviation of the pairwise fractions
  std::size_t sample_count = 0;
  HdKind kind = HdKind::Intra;
};

// Response vectors per chip and repeat, in dataset record order.
std::map<std::uint32_t, std::vector<BitVector>> responses_by_chip(const CrpDataset& data);

// Pairwise HD between repeats of each chip, pooled over chips.
HdReport intra_hd(const CrpDataset& data);
// Pairwise HD between the first repeats of distinct chips.
HdReport inter_hd(const CrpDataset& data);

HdReport intra_hd(const std::vector<std::vector<BitVector>>& repeats_per_chip);
HdReport inter_hd(const std::vector<BitVector>& chips);

double uniformity(std::span<const std::uint8_t> bits);

// First-repeat responses of every chip, concatenated in chip order.
BitVector response_bitstream(const CrpDataset& data);

// Raw bit files: bits packed MSB-first into bytes, zero-padded at the end.
void write_bit_file(const std::string& path, std::span<const std::uint8_t> bits);
BitVector read_bit_file(const std::string& path);

}  // namespace stpuf
