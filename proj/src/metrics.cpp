#include "stpuf/metrics.hpp"

#include <cmath>
#include <fstream>
#include <iterator>

#include "stpuf/error.hpp"

namespace stpuf {

std::size_t hamming_distance(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  require(a.size() == b.size(), "hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != 0) != (b[i] != 0);
  return d;
}

namespace {

HdReport summarize(const std::vector<double>& fractions, HdKind kind) {
  HdReport r;
  r.kind = kind;
  r.sample_count = fractions.size();
  if (fractions.empty()) return r;
  double sum = 0.0;
  for (double f : fractions) sum += f;
  r.mean = sum / static_cast<double>(fractions.size());
  if (fractions.size() > 1) {
    double ss = 0.0;
    for (double f : fractions) ss += (f - r.mean) * (f - r.mean);
    r.sigma = std::sqrt(ss / static_cast<double>(fractions.size() - 1));
  }
  return r;
}

double fraction(const BitVector& a, const BitVector& b) {
  require(!a.empty(), "empty response vector");
  return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

}  // namespace

std::map<std::uint32_t, std::vector<BitVector>> responses_by_chip(const CrpDataset& data) {
  std::map<std::uint32_t, std::map<std::uint32_t, BitVector>> grouped;
  for (const auto& e : data.entries) grouped[e.chip_id][e.repeat_id].push_back(e.response);
  std::map<std::uint32_t, std::vector<BitVector>> out;
  std::size_t length = 0;
  for (auto& [chip, repeats] : grouped) {
    auto& v = out[chip];
    for (auto& [rep, bits] : repeats) {
      if (length == 0) length = bits.size();
      require(bits.size() == length, "every chip/repeat must answer the same number of challenges");
      v.push_back(std::move(bits));
    }
  }
  return out;
}

HdReport intra_hd(const std::vector<std::vector<BitVector>>& repeats_per_chip) {
  std::vector<double> fractions;
  for (const auto& reps : repeats_per_chip) {
    require(reps.size() >= 2, "intra_hd: every chip needs at least two repeats");
    for (std::size_t i = 0; i < reps.size(); ++i)
      for (std::size_t j = i + 1; j < reps.size(); ++j) fractions.push_back(fraction(reps[i], reps[j]));
  }
  require(!fractions.empty(), "intra_hd: empty dataset");
  return summarize(fractions, HdKind::Intra);
}

HdReport inter_hd(const std::vector<BitVector>& chips) {
  require(chips.size() >= 2, "inter_hd: at least two chips are required");
  std::vector<double> fractions;
  fractions.reserve(chips.size() * (chips.size() - 1) / 2);
  for (std::size_t i = 0; i < chips.size(); ++i)
    for (std::size_t j = i + 1; j < chips.size(); ++j) fractions.push_back(fraction(chips[i], chips[j]));
  return summarize(fractions, HdKind::Inter);
}

HdReport intra_hd(const CrpDataset& data) {
  std::vector<std::vector<BitVector>> v;
  for (auto& [chip, reps] : responses_by_chip(data)) v.push_back(std::move(reps));
  require(!v.empty(), "intra_hd: empty dataset");
  return intra_hd(v);
}

HdReport inter_hd(const CrpDataset& data) {
  std::vector<BitVector> v;
  for (auto& [chip, reps] : responses_by_chip(data)) v.push_back(std::move(reps.front()));
  return inter_hd(v);
}

double uniformity(std::span<const std::uint8_t> bits) {
  require(!bits.empty(), "uniformity: empty bit vector");
  std::size_t ones = 0;
  for (auto b : bits) ones += b != 0;
  return static_cast<double>(ones) / static_cast<double>(bits.size());
}

BitVector response_bitstream(const CrpDataset& data) {
  BitVector out;
  for (auto& [chip, reps] : responses_by_chip(data)) out.insert(out.end(), reps.front().begin(), reps.front().end());
  return out;
}

void write_bit_file(const std::string& path, std::span<const std::uint8_t> bits) {
  std::vector<char> bytes((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) bytes[i / 8] = static_cast<char>(bytes[i / 8] | (0x80 >> (i % 8)));
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCategory::Io, "cannot open '" + path + "' for writing");
  os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorCategory::Io, "write failed for '" + path + "'");
}

BitVector read_bit_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCategory::Io, "cannot open '" + path + "' for reading");
  std::vector<char> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  BitVector bits;
  bits.reserve(bytes.size() * 8);
  for (char c : bytes)
    for (int b = 7; b >= 0; --b) bits.push_back((static_cast<unsigned char>(c) >> b) & 1u);
  return bits;
}

}  // namespace stpuf
