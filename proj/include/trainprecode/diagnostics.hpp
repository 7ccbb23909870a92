// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <cstdint>

namespace trainprecode::diagnostics {

/// Running count of eigenvalues silently clamped to zero by PSD sanitation.
inline std::atomic<std::uint64_t>& clamped_eigenvalues() {
  static std::atomic<std::uint64_t> counter{0};
  return counter;
}

}  // namespace trainprecode::diagnostics
