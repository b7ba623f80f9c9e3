#include "stpuf/population.hpp"

#include <charconv>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "stpuf/error.hpp"
#include "stpuf/keyed_rng.hpp"

namespace stpuf {

void validate(const VariationSpec& v) {
  require(v.vth_sigma >= 0.0, "vth_sigma must be >= 0");
  require(v.sample_count >= 1, "sample_count must be >= 1");
}

std::string DevicePath::str() const {
  return circuit + "/" + std::to_string(gate) + "/" + std::to_string(transistor);
}

std::uint64_t DevicePath::hash() const noexcept { return fnv1a64(str()); }

DeviceManifest::DeviceManifest(std::vector<DevicePath> paths) {
  for (auto& p : paths) insert(std::move(p));
}

void DeviceManifest::add_circuit(const std::string& circuit, std::uint32_t gates,
                                 std::uint32_t devices_per_gate) {
  for (std::uint32_t g = 0; g < gates; ++g)
    for (std::uint32_t t = 0; t < devices_per_gate; ++t) insert(DevicePath{circuit, g, t});
}

void DeviceManifest::insert(DevicePath p) {
  require(p.circuit.find_first_of("/,\n") == std::string::npos,
          "circuit names may not contain '/', ',' or newlines");
  auto [it, inserted] = index_.emplace(p, paths_.size());
  require(inserted, "duplicate device path " + p.str());
  paths_.push_back(std::move(p));
}

std::size_t DeviceManifest::index_of(const DevicePath& p) const {
  auto it = index_.find(p);
  if (it == index_.end()) fail(ErrorCategory::Argument, "unknown device path " + p.str());
  return it->second;
}

ChipInstance::ChipInstance(std::uint32_t chip_id, std::shared_ptr<const DeviceManifest> manifest,
                           std::vector<double> shifts)
    : chip_id_(chip_id), manifest_(std::move(manifest)), shifts_(std::move(shifts)) {
  require(manifest_ != nullptr, "chip requires a manifest");
  require(shifts_.size() == manifest_->size(), "one shift per manifest device required");
}

std::vector<double> ChipInstance::gate_shifts(const std::string& circuit, std::uint32_t gate,
                                              std::uint32_t count) const {
  std::vector<double> out;
  out.reserve(count);
  const std::size_t first = manifest_->index_of(DevicePath{circuit, gate, 0});
  for (std::uint32_t t = 0; t < count; ++t) {
    // Manifest circuits are laid out gate-major, so consecutive slots follow.
    const std::size_t i = first + t;
    if (i >= shifts_.size() || manifest_->paths()[i] != DevicePath{circuit, gate, t}) {
      out.push_back(shift(DevicePath{circuit, gate, t}));
    } else {
      out.push_back(shifts_[i]);
    }
  }
  return out;
}

double device_shift(const VariationSpec& spec, std::uint32_t chip_id, const DevicePath& path) {
  if (spec.vth_sigma == 0.0) return spec.vth_mean;
  const StreamKey key = StreamKey(spec.master_seed).derive("population").derive(chip_id).derive(
      path.hash());
  return spec.vth_mean + spec.vth_sigma * key.normal();
}

std::vector<ChipInstance> sample_population(const VariationSpec& spec,
                                            std::shared_ptr<const DeviceManifest> manifest) {
  validate(spec);
  require(manifest != nullptr && !manifest->empty(), "sample_population: empty circuit manifest");
  std::vector<ChipInstance> chips;
  chips.reserve(static_cast<std::size_t>(spec.sample_count));
  for (int c = 0; c < spec.sample_count; ++c) {
    const auto id = static_cast<std::uint32_t>(c);
    std::vector<double> shifts;
    shifts.reserve(manifest->size());
    for (const auto& p : manifest->paths()) shifts.push_back(device_shift(spec, id, p));
    chips.emplace_back(id, manifest, std::move(shifts));
  }
  return chips;
}

void write_population(std::ostream& os, const std::vector<ChipInstance>& chips) {
  os << "chip_id,device_path,shift\n";
  char buf[64];
  for (const auto& chip : chips) {
    const auto& paths = chip.manifest().paths();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      auto res = std::to_chars(buf, buf + sizeof buf, chip.shifts()[i]);
      os << chip.chip_id() << ',' << paths[i].str() << ',' << std::string_view(buf, res.ptr - buf)
         << '\n';
    }
  }
}

namespace {

DevicePath parse_path(const std::string& s) {
  const auto b = s.rfind('/');
  const auto a = b == std::string::npos ? std::string::npos : s.rfind('/', b - 1);
  if (a == std::string::npos || a == 0) fail(ErrorCategory::Io, "malformed device path '" + s + "'");
  DevicePath p;
  p.circuit = s.substr(0, a);
  p.gate = static_cast<std::uint32_t>(std::stoul(s.substr(a + 1, b - a - 1)));
  p.transistor = static_cast<std::uint32_t>(std::stoul(s.substr(b + 1)));
  return p;
}

}  // namespace

std::vector<ChipInstance> read_population(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != "chip_id,device_path,shift")
    fail(ErrorCategory::Io, "population file: missing header");
  std::map<std::uint32_t, std::vector<std::pair<DevicePath, double>>> rows;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c1 = line.find(',');
    const auto c2 = line.rfind(',');
    if (c1 == std::string::npos || c1 == c2)
      fail(ErrorCategory::Io, "population file: malformed line " + std::to_string(lineno));
    const auto chip = static_cast<std::uint32_t>(std::stoul(line.substr(0, c1)));
    double shift = 0.0;
    const char* first = line.data() + c2 + 1;
    auto res = std::from_chars(first, line.data() + line.size(), shift);
    if (res.ec != std::errc())
      fail(ErrorCategory::Io, "population file: bad shift on line " + std::to_string(lineno));
    rows[chip].emplace_back(parse_path(line.substr(c1 + 1, c2 - c1 - 1)), shift);
  }
  std::vector<ChipInstance> chips;
  std::shared_ptr<const DeviceManifest> manifest;
  for (auto& [id, entries] : rows) {
    std::vector<DevicePath> paths;
    std::vector<double> shifts;
    for (auto& [p, s] : entries) {
      paths.push_back(p);
      shifts.push_back(s);
    }
    if (!manifest || manifest->paths() != paths) {
      manifest = std::make_shared<const DeviceManifest>(std::move(paths));
    }
    chips.emplace_back(id, manifest, std::move(shifts));
  }
  return chips;
}

}  // namespace stpuf
