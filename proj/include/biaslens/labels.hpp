#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace biaslens {

/// The seven bias categories, in the canonical order used for storage,
/// training and reporting.
enum class BiasLabel : std::uint8_t {
  kPolitical = 0,
  kGender,
  kEntity,
  kRacial,
  kReligious,
  kRegional,
  kSensational,
};

inline constexpr std::size_t kNumLabels = 7;

inline constexpr std::array<std::string_view, kNumLabels> kLabelKeys = {
    "political", "gender", "entity", "racial", "religious", "regional", "sensational"};

inline constexpr std::array<std::string_view, kNumLabels> kLabelDisplayNames = {
    "Political Bias", "Gender Bias",   "Entity Bias",     "Racial Bias",
    "Religious Bias", "Regional Bias", "Sensational Bias"};

constexpr std::string_view label_key(std::size_t index) { return kLabelKeys[index]; }
constexpr std::string_view label_key(BiasLabel label) {
  return kLabelKeys[static_cast<std::size_t>(label)];
}

std::optional<std::size_t> label_index(std::string_view key);

/// Seven binary flags in canonical order.
class BiasVector {
 public:
  constexpr BiasVector() = default;
  /// Throws std::invalid_argument when any entry is not 0 or 1.
  explicit BiasVector(const std::array<int, kNumLabels>& flags);

  static BiasVector from_mask(std::uint32_t mask);

  constexpr bool operator[](std::size_t i) const { return (mask_ >> i) & 1U; }
  bool operator[](BiasLabel label) const { return (*this)[static_cast<std::size_t>(label)]; }
  void set(std::size_t i, bool value);

  /// Bit i holds label i.
  constexpr std::uint32_t mask() const { return mask_; }
  constexpr bool any() const { return mask_ != 0; }
  int count() const;

  std::array<int, kNumLabels> to_array() const;

  friend constexpr bool operator==(BiasVector, BiasVector) = default;

 private:
  std::uint32_t mask_ = 0;
};

/// "(1,0,0,1,0,0,0)"
std::string to_string(BiasVector v);

}  // namespace biaslens
