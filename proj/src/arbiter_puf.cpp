#include "stpuf/arbiter_puf.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

#include "stpuf/error.hpp"

namespace stpuf {

std::string arbiter_circuit(GateKind kind) {
  return std::string("arbiter.") + gate_kind_name(kind);
}

void add_arbiter_circuit(DeviceManifest& manifest, GateKind kind, int stages) {
  manifest.add_circuit(arbiter_circuit(kind), static_cast<std::uint32_t>(stages * 4),
                       static_cast<std::uint32_t>(device_count(kind)));
}

ArbiterPufInstance build_arbiter(const ChipInstance& chip, GateKind kind, int stages,
                                 const DeviceConstants& constants, double setup_window) {
  require(stages >= 1, "arbiter PUF needs at least one stage");
  require(setup_window >= 0.0, "setup_window must be >= 0");
  ArbiterPufInstance puf;
  puf.chip_id = chip.chip_id();
  puf.stage_kind = kind;
  puf.setup_window = setup_window;
  const std::string circuit = arbiter_circuit(kind);
  const auto n = static_cast<std::uint32_t>(device_count(kind));
  for (int s = 0; s < stages; ++s) {
    SwitchStage stage;
    for (std::size_t seg = 0; seg < 4; ++seg) {
      const auto gate = static_cast<std::uint32_t>(s * 4 + static_cast<int>(seg));
      stage.segments[seg] = make_gate(kind, constants, false, chip.gate_shifts(circuit, gate, n));
    }
    puf.stages.push_back(std::move(stage));
  }
  return puf;
}

SegmentDelays segment_delays(const ArbiterPufInstance& puf, const EnvCondition& env) {
  SegmentDelays out(puf.stages.size());
  for (std::size_t s = 0; s < puf.stages.size(); ++s)
    for (std::size_t seg = 0; seg < 4; ++seg) out[s][seg] = gate_delay(puf.stages[s].segments[seg], env);
  return out;
}

std::pair<double, double> trace_paths(const SegmentDelays& delays, const Challenge& challenge) {
  require(challenge.size() == delays.size(), "challenge length must equal the stage count");
  double top = 0.0;
  double bottom = 0.0;
  for (std::size_t s = 0; s < delays.size(); ++s) {
    const auto& d = delays[s];
    if (challenge[s] == 0) {
      top += d[TopStraight];
      bottom += d[BottomStraight];
    } else {
      const double new_top = bottom + d[BottomCross];
      bottom = top + d[TopCross];
      top = new_top;
    }
  }
  return {top, bottom};
}

std::pair<double, double> path_delays(const ArbiterPufInstance& puf, const Challenge& challenge,
                                      const EnvCondition& env) {
  require(challenge.size() == puf.stages.size(), "challenge length must equal the stage count");
  return trace_paths(segment_delays(puf, env), challenge);
}

int arbitrate(double raw_delta, double setup_window, const StreamKey& noise) {
  if (std::abs(raw_delta) <= setup_window) return noise.coin() ? 1 : 0;
  return raw_delta < 0.0 ? 1 : 0;
}

CrpRecord evaluate(const ArbiterPufInstance& puf, const Challenge& challenge,
                   const EnvCondition& env, const StreamKey& noise) {
  const auto [top, bottom] = path_delays(puf, challenge, env);
  CrpRecord r;
  r.challenge = challenge;
  r.raw_delta = top - bottom;
  r.response = arbitrate(r.raw_delta, puf.setup_window, noise);
  return r;
}

std::vector<Challenge> all_challenges(int stages) {
  require(stages >= 1 && stages <= 20, "all_challenges: stage count must lie in [1, 20]");
  std::vector<Challenge> out;
  const std::uint32_t n = 1u << stages;
  out.reserve(n);
  for (std::uint32_t v = 0; v < n; ++v) {
    Challenge c(static_cast<std::size_t>(stages));
    for (int i = 0; i < stages; ++i) c[static_cast<std::size_t>(i)] = (v >> i) & 1u;
    out.push_back(std::move(c));
  }
  return out;
}

std::vector<Challenge> random_challenges(int stages, int count, const StreamKey& key) {
  require(stages >= 1 && count >= 1, "random_challenges: stages and count must be positive");
  std::vector<Challenge> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) {
    Challenge c(static_cast<std::size_t>(stages));
    const StreamKey ck = key.derive(static_cast<std::uint64_t>(k));
    for (int i = 0; i < stages; ++i) c[static_cast<std::size_t>(i)] = ck.coin(static_cast<std::uint64_t>(i));
    out.push_back(std::move(c));
  }
  return out;
}

std::string challenge_to_hex(const Challenge& c) {
  static constexpr char digits[] = "0123456789abcdef";
  const std::size_t width = (c.size() + 3) / 4;
  std::string out(width, '0');
  for (std::size_t d = 0; d < width; ++d) {
    unsigned v = 0;
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = d * 4 + b;
      if (i < c.size() && c[i]) v |= 1u << b;
    }
    out[width - 1 - d] = digits[v];
  }
  return out;
}

Challenge challenge_from_hex(const std::string& hex, int stages) {
  require(stages >= 1, "challenge_from_hex: stages must be positive");
  const std::size_t width = (static_cast<std::size_t>(stages) + 3) / 4;
  if (hex.size() != width) fail(ErrorCategory::Io, "challenge '" + hex + "' has the wrong width");
  Challenge c(static_cast<std::size_t>(stages), 0);
  for (std::size_t d = 0; d < width; ++d) {
    const char ch = hex[width - 1 - d];
    unsigned v = 0;
    if (ch >= '0' && ch <= '9') v = static_cast<unsigned>(ch - '0');
    else if (ch >= 'a' && ch <= 'f') v = static_cast<unsigned>(ch - 'a' + 10);
    else fail(ErrorCategory::Io, "challenge '" + hex + "' is not lowercase hex");
    for (std::size_t b = 0; b < 4; ++b) {
      const std::size_t i = d * 4 + b;
      const bool bit = (v >> b) & 1u;
      if (i < c.size()) c[i] = bit;
      else if (bit) fail(ErrorCategory::Io, "challenge '" + hex + "' sets bits beyond the stage count");
    }
  }
  return c;
}

DeltaDistribution delta_distribution(const std::vector<ArbiterPufInstance>& pufs,
                                     const std::vector<Challenge>& challenges,
                                     const EnvCondition& env) {
  require(!pufs.empty() && !challenges.empty(), "delta_distribution: empty input");
  DeltaDistribution d;
  d.samples.reserve(pufs.size() * challenges.size());
  for (const auto& puf : pufs) {
    const SegmentDelays delays = segment_delays(puf, env);
    for (const auto& c : challenges) {
      const auto [top, bottom] = trace_paths(delays, c);
      d.samples.push_back(top - bottom);
    }
  }
  double sum = 0.0;
  std::size_t positive = 0;
  for (double x : d.samples) {
    sum += x;
    if (x > 0.0) ++positive;
  }
  const auto n = static_cast<double>(d.samples.size());
  d.mean = sum / n;
  double ss = 0.0;
  for (double x : d.samples) ss += (x - d.mean) * (x - d.mean);
  d.std = d.samples.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
  d.fraction_positive = static_cast<double>(positive) / n;
  return d;
}

void validate(const EnvNoiseSpec& n) {
  require(n.nominal_vdd > 0.0, "nominal_vdd must be positive");
  require(n.vdd_fraction >= 0.0 && n.vdd_fraction < 1.0, "vdd_fraction must lie in [0, 1)");
  require(n.temp_min > 0.0 && n.temp_max >= n.temp_min, "temperature range must be positive and ordered");
}

EnvCondition draw_environment(const EnvNoiseSpec& noise, const StreamKey& key) {
  EnvCondition env;
  env.vdd = noise.nominal_vdd * (1.0 + noise.vdd_fraction * (2.0 * key.uniform(0) - 1.0));
  env.vss = 0.0;
  env.temperature = noise.temp_min + (noise.temp_max - noise.temp_min) * key.uniform(1);
  return env;
}

CrpDataset crp_dataset(const std::vector<ArbiterPufInstance>& pufs, int n_challenges,
                       int n_repeats, const EnvNoiseSpec& noise, std::uint64_t seed) {
  require(!pufs.empty(), "crp_dataset: empty PUF population");
  require(n_challenges >= 1, "crp_dataset: n_challenges must be >= 1");
  require(n_repeats >= 2, "crp_dataset: n_repeats must be >= 2");
  validate(noise);
  const int stages = static_cast<int>(pufs.front().stages.size());
  for (const auto& p : pufs) require(static_cast<int>(p.stages.size()) == stages, "crp_dataset: mixed stage counts");

  const StreamKey root(seed);
  CrpDataset data;
  data.stages = stages;
  data.challenges = random_challenges(stages, n_challenges, root.derive("challenges"));
  data.entries.reserve(pufs.size() * static_cast<std::size_t>(n_repeats * n_challenges));
  for (const auto& puf : pufs) {
    for (int r = 0; r < n_repeats; ++r) {
      const auto repeat = static_cast<std::uint32_t>(r);
      const EnvCondition env =
          draw_environment(noise, root.derive("arbiter-env").derive(puf.chip_id).derive(repeat));
      const SegmentDelays delays = segment_delays(puf, env);
      const StreamKey meta = root.derive("arbiter-meta").derive(puf.chip_id).derive(repeat);
      for (int c = 0; c < n_challenges; ++c) {
        const auto idx = static_cast<std::uint32_t>(c);
        const auto [top, bottom] = trace_paths(delays, data.challenges[idx]);
        const int bit = arbitrate(top - bottom, puf.setup_window, meta.derive(idx));
        data.entries.push_back({puf.chip_id, repeat, idx, static_cast<std::uint8_t>(bit)});
      }
    }
  }
  return data;
}

void write_crp_dataset(std::ostream& os, const CrpDataset& data,
                       const std::vector<std::string>& header_lines) {
  os << "# stpuf-crp v1\n";
  os << "# stages=" << data.stages << "\n";
  for (const auto& h : header_lines) os << "# " << h << "\n";
  std::vector<std::string> hex;
  hex.reserve(data.challenges.size());
  for (const auto& c : data.challenges) hex.push_back(challenge_to_hex(c));
  for (const auto& e : data.entries)
    os << e.chip_id << ',' << e.repeat_id << ',' << hex[e.challenge_index] << ','
       << static_cast<int>(e.response) << '\n';
}

void write_crp_dataset_file(const std::string& path, const CrpDataset& data,
                            const std::vector<std::string>& header_lines) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCategory::Io, "cannot open '" + path + "' for writing");
  write_crp_dataset(os, data, header_lines);
  if (!os) fail(ErrorCategory::Io, "write failed for '" + path + "'");
}

CrpDataset read_crp_dataset(std::istream& is) {
  CrpDataset data;
  std::map<std::string, std::uint32_t> index;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind("# stages=", 0) == 0) data.stages = std::stoi(line.substr(9));
      continue;
    }
    if (data.stages <= 0) fail(ErrorCategory::Io, "CRP file: record before '# stages=' header");
    std::string fields[4];
    std::size_t pos = 0;
    for (int f = 0; f < 4; ++f) {
      const std::size_t comma = f < 3 ? line.find(',', pos) : line.size();
      if (comma == std::string::npos)
        fail(ErrorCategory::Io, "CRP file: malformed line " + std::to_string(lineno));
      fields[f] = line.substr(pos, comma - pos);
      pos = comma + 1;
    }
    if (fields[3] != "0" && fields[3] != "1")
      fail(ErrorCategory::Io, "CRP file: response must be 0 or 1 on line " + std::to_string(lineno));
    auto [it, inserted] = index.emplace(fields[2], static_cast<std::uint32_t>(data.challenges.size()));
    if (inserted) data.challenges.push_back(challenge_from_hex(fields[2], data.stages));
    CrpEntry e;
    e.chip_id = static_cast<std::uint32_t>(std::stoul(fields[0]));
    e.repeat_id = static_cast<std::uint32_t>(std::stoul(fields[1]));
    e.challenge_index = it->second;
    e.response = fields[3] == "1" ? 1 : 0;
    data.entries.push_back(e);
  }
  return data;
}

CrpDataset read_crp_dataset_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCategory::Io, "cannot open '" + path + "' for reading");
  return read_crp_dataset(is);
}

}  // namespace stpuf
