// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#include "streamrope/decoder/memory.hpp"

#include <algorithm>

namespace streamrope::decoder {

MemoryQueue::MemoryQueue(std::size_t capacity, std::size_t max_age)
    : capacity_(capacity), max_age_(max_age) {}

std::int64_t MemoryQueue::oldest_age(std::int64_t current_frame) const {
  std::int64_t oldest = 0;
  for (const auto& e : entries_) oldest = std::max(oldest, current_frame - e.frame_id);
  return oldest;
}

bool MemoryQueue::well_formed(std::int64_t current_frame) const {
  if (entries_.size() > capacity_) return false;
  for (const auto& e : entries_) {
    const std::int64_t age = current_frame - e.frame_id;
    if (age < 0 || age > static_cast<std::int64_t>(max_age_)) return false;
  }
  return true;
}

}  // namespace streamrope::decoder
