// Copyright 2026 The streamrope Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "streamrope/numerics/tape.hpp"

namespace streamrope::decoder {

// A propagated object query. `feature` (1 x model_dim) and `anchor` (1 x 2,
// extent units) stay on the episode tape so later frames backpropagate into
// the frame that produced them.
struct QueryState {
  numerics::Var feature;
  numerics::Var anchor;
  std::int64_t frame_id = 0;  // origin frame, never re-stamped here
  double score = 0.0;
};

class MemoryQueue {
 public:
  MemoryQueue(std::size_t capacity = 64, std::size_t max_age = 4);

  std::size_t capacity() const { return capacity_; }
  std::size_t max_age() const { return max_age_; }
  const std::vector<QueryState>& entries() const { return entries_; }
  std::vector<QueryState>& entries() { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Largest current_frame - frame_id over the entries (0 when empty).
  std::int64_t oldest_age(std::int64_t current_frame) const;
  // Size and age bounds as seen by the decoder at `current_frame`.
  bool well_formed(std::int64_t current_frame) const;

 private:
  std::size_t capacity_;
  std::size_t max_age_;
  std::vector<QueryState> entries_;
};

}  // namespace streamrope::decoder
