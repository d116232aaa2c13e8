#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "alma/error.hpp"

namespace alma::store {

/// A storage unit: Unknown, or Known holding a simple value. Booleans are
/// stored as 0/1 and enumeration values as their ordinal.
struct Cell {
  int64_t value = 0;
  bool known = false;

  static Cell of(int64_t v) { return Cell{v, true}; }
  bool operator==(const Cell& o) const {
    return known == o.known && (!known || value == o.value);
  }
};

/// Inclusive admissible range of a scalar slot.
struct Bounds {
  int64_t lo = INT64_MIN;
  int64_t hi = INT64_MAX;
  bool contains(int64_t v) const { return lo <= v && v <= hi; }
};

struct TrailEntry {
  uint32_t index = 0;
  Cell prior;
};

/// Rollback point: trail length plus heap top.
struct Mark {
  size_t trail = 0;
  uint32_t top = 0;
};

/// Cell heap with a trail of prior states.
///
/// Cells are allocated at the heap top and addressed by index. A write is
/// recorded on the trail only when the cell predates the newest barrier
/// (the heap top saved by push_barrier): younger cells vanish anyway when
/// control returns to that barrier, because undo_to also resets the top.
/// Without any barrier nothing can be rolled back, so nothing is recorded.
class Store {
 public:
  Store() = default;

  // --- heap ---------------------------------------------------------------

  /// Appends n fresh Unknown cells and returns the index of the first.
  uint32_t allocate(uint32_t n);
  uint32_t top() const { return top_; }
  /// Discards every cell at or above `top`. Used when a call returns
  /// without leaving choice points behind.
  void release_to(uint32_t top);

  const Cell& cell(uint32_t i) const { return cells_[i]; }
  std::span<const Cell> cells(uint32_t base, uint32_t n) const {
    return {cells_.data() + base, n};
  }
  /// Sets a cell without recording it. Only for cells that are not yet
  /// reachable by any barrier (freshly allocated frames).
  void init(uint32_t i, Cell c) { cells_[i] = c; }

  // --- reading and writing ------------------------------------------------

  bool known(uint32_t i) const { return cells_[i].known; }
  /// TRUE iff every cell of the block is Known.
  bool known(uint32_t base, uint32_t n) const;
  /// Value of a Known cell; Unknown raises "uninitialized variable".
  int64_t read(uint32_t i, SourceSpan where = {}) const;

  /// Destructive write of a Known value, range-checked against `b`.
  void write(uint32_t i, int64_t v, Bounds b, SourceSpan where = {});
  /// Writes a cell state verbatim (array copies keep Unknown cells).
  void set(uint32_t i, Cell c);

  // --- barriers and rollback ----------------------------------------------

  void push_barrier() { barriers_.push_back(top_); }
  void pop_barrier();
  size_t barrier_depth() const { return barriers_.size(); }
  /// Heap top recorded by the newest barrier; 0 when there is none.
  uint32_t hb() const { return barriers_.empty() ? 0 : barriers_.back(); }

  Mark mark() const { return Mark{trail_.size(), top_}; }
  /// Reverts every recorded mutation after `m` (newest first) and resets
  /// the heap top. Returns the number of entries undone. A mark that lies
  /// beyond the current trail or heap is an engine bug (std::logic_error).
  size_t undo_to(Mark m);
  /// After a cut: drops entries recorded since `from` for cells that the
  /// now-newest barrier no longer protects.
  void tidy(size_t from);
  size_t trail_size() const { return trail_.size(); }
  std::span<const TrailEntry> trail() const { return trail_; }

  // --- persistent effects of an iterated body -----------------------------

  /// Makes the writes recorded in trail[body_from, end) immune to rollback
  /// into trail[outer_from, body_from).
  ///
  /// Written cells below `region_top` that are not yet in `log` are added
  /// with the state they had at `outer_from`. Entries in the outer range
  /// for written cells get the current state as their prior, so undoing
  /// them keeps the body's result. The body's own entries are removed.
  void persist(size_t outer_from, size_t body_from, uint32_t region_top,
               std::vector<TrailEntry>& log);
  /// Restores every logged cell to its logged state (abort path).
  void restore(const std::vector<TrailEntry>& log);
  /// Re-records the logged states so that an enclosing rollback restores
  /// them; entries for cells not protected by the current barrier are
  /// skipped.
  void record(const std::vector<TrailEntry>& log);

  /// Full copy of the live heap, for tests and diagnostics.
  std::vector<Cell> snapshot() const {
    return {cells_.begin(), cells_.begin() + top_};
  }

 private:
  void trail_write(uint32_t i) {
    if (i < hb()) trail_.push_back(TrailEntry{i, cells_[i]});
  }

  std::vector<Cell> cells_;
  uint32_t top_ = 0;
  std::vector<TrailEntry> trail_;
  std::vector<uint32_t> barriers_;
};

}  // namespace alma::store
