#include "biaslens/labels.hpp"

#include <bit>
#include <stdexcept>

namespace biaslens {

std::optional<std::size_t> label_index(std::string_view key) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (kLabelKeys[i] == key) return i;
  }
  return std::nullopt;
}

BiasVector::BiasVector(const std::array<int, kNumLabels>& flags) {
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (flags[i] != 0 && flags[i] != 1) {
      throw std::invalid_argument("bias flag " + std::string(kLabelKeys[i]) +
                                  " must be 0 or 1, got " + std::to_string(flags[i]));
    }
    set(i, flags[i] == 1);
  }
}

BiasVector BiasVector::from_mask(std::uint32_t mask) {
  if (mask >= (1U << kNumLabels)) throw std::invalid_argument("bias mask out of range");
  BiasVector v;
  v.mask_ = mask;
  return v;
}

void BiasVector::set(std::size_t i, bool value) {
  if (i >= kNumLabels) throw std::out_of_range("bias label index out of range");
  if (value) {
    mask_ |= (1U << i);
  } else {
    mask_ &= ~(1U << i);
  }
}

int BiasVector::count() const { return std::popcount(mask_); }

std::array<int, kNumLabels> BiasVector::to_array() const {
  std::array<int, kNumLabels> out{};
  for (std::size_t i = 0; i < kNumLabels; ++i) out[i] = (*this)[i] ? 1 : 0;
  return out;
}

std::string to_string(BiasVector v) {
  std::string s = "(";
  for (std::size_t i = 0; i < kNumLabels; ++i) {
    if (i) s += ',';
    s += v[i] ? '1' : '0';
  }
  s += ')';
  return s;
}

}  // namespace biaslens
