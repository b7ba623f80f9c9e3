#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

namespace stpuf {

struct VariationSpec {
  double vth_sigma = 0.050;
  double vth_mean = 0.0;
  int sample_count = 500;
  std::uint64_t master_seed = 0;
};

void validate(const VariationSpec& v);

// Identifies one transistor across every simulated circuit on a die.
struct DevicePath {
  std::string circuit;
  std::uint32_t gate = 0;
  std::uint32_t transistor = 0;

  std::string str() const;
  std::uint64_t hash() const noexcept;

  friend bool operator==(const DevicePath&, const DevicePath&) = default;
};

struct DevicePathHash {
  std::size_t operator()(const DevicePath& p) const noexcept {
    return static_cast<std::size_t>(p.hash());
  }
};

class DeviceManifest {
 public:
  DeviceManifest() = default;
  explicit DeviceManifest(std::vector<DevicePath> paths);

  // Appends `gates` gates of `devices_per_gate` transistors under `circuit`.
  void add_circuit(const std::string& circuit, std::uint32_t gates, std::uint32_t devices_per_gate);

  const std::vector<DevicePath>& paths() const noexcept { return paths_; }
  std::size_t size() const noexcept { return paths_.size(); }
  bool empty() const noexcept { return paths_.empty(); }

  // Throws Argument if the path is not part of the manifest.
  std::size_t index_of(const DevicePath& p) const;

 private:
  void insert(DevicePath p);

  std::vector<DevicePath> paths_;
  std::unordered_map<DevicePath, std::size_t, DevicePathHash> index_;
};

class ChipInstance {
 public:
  ChipInstance(std::uint32_t chip_id, std::shared_ptr<const DeviceManifest> manifest,
               std::vector<double> shifts);

  std::uint32_t chip_id() const noexcept { return chip_id_; }
  const DeviceManifest& manifest() const noexcept { return *manifest_; }
  const std::vector<double>& shifts() const noexcept { return shifts_; }

  double shift(const DevicePath& p) const { return shifts_[manifest_->index_of(p)]; }
  // Shifts of `count` consecutive transistors of one gate.
  std::vector<double> gate_shifts(const std::string& circuit, std::uint32_t gate,
                                  std::uint32_t count) const;

 private:
  std::uint32_t chip_id_;
  std::shared_ptr<const DeviceManifest> manifest_;
  std::vector<double> shifts_;
};

// Shift for one device, a pure function of (seed, chip, path).
double device_shift(const VariationSpec& spec, std::uint32_t chip_id, const DevicePath& path);

std::vector<ChipInstance> sample_population(const VariationSpec& spec,
                                            std::shared_ptr<const DeviceManifest> manifest);

// Columnar audit format: "chip_id,device_path,shift" with a header line.
void write_population(std::ostream& os, const std::vector<ChipInstance>& chips);
std::vector<ChipInstance> read_population(std::istream& is);

}  // namespace stpuf
