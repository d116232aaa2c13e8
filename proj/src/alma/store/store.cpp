#include "alma/store/store.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace alma::store {

namespace {

constexpr uint32_t kMaxCells = 1u << 30;

}  // namespace

uint32_t Store::allocate(uint32_t n) {
  if (n > kMaxCells - top_)
    throw RuntimeError({}, "out of memory: cell heap exhausted");
  uint32_t base = top_;
  top_ += n;
  if (cells_.size() < top_) cells_.resize(std::max<size_t>(top_, cells_.size() * 2));
  std::fill(cells_.begin() + base, cells_.begin() + top_, Cell{});
  return base;
}

void Store::release_to(uint32_t top) {
  if (top > top_) throw std::logic_error("release_to above the heap top");
  top_ = top;
}

bool Store::known(uint32_t base, uint32_t n) const {
  for (uint32_t i = base; i < base + n; ++i)
    if (!cells_[i].known) return false;
  return true;
}

int64_t Store::read(uint32_t i, SourceSpan where) const {
  if (!cells_[i].known) throw RuntimeError(where, "uninitialized variable");
  return cells_[i].value;
}

void Store::write(uint32_t i, int64_t v, Bounds b, SourceSpan where) {
  if (!b.contains(v))
    throw RuntimeError(where, "value " + std::to_string(v) + " out of range [" +
                                  std::to_string(b.lo) + ".." +
                                  std::to_string(b.hi) + "]");
  trail_write(i);
  cells_[i] = Cell::of(v);
}

void Store::set(uint32_t i, Cell c) {
  trail_write(i);
  cells_[i] = c;
}

void Store::pop_barrier() {
  if (barriers_.empty()) throw std::logic_error("barrier stack underflow");
  barriers_.pop_back();
}

size_t Store::undo_to(Mark m) {
  if (m.trail > trail_.size() || m.top > top_)
    throw std::logic_error("undo_to: mark is no longer valid");
  size_t undone = trail_.size() - m.trail;
  for (size_t k = trail_.size(); k > m.trail; --k) {
    const TrailEntry& e = trail_[k - 1];
    cells_[e.index] = e.prior;
  }
  trail_.resize(m.trail);
  top_ = m.top;
  return undone;
}

void Store::tidy(size_t from) {
  uint32_t limit = hb();
  auto keep = std::remove_if(trail_.begin() + static_cast<ptrdiff_t>(from),
                             trail_.end(),
                             [limit](const TrailEntry& e) { return e.index >= limit; });
  trail_.erase(keep, trail_.end());
}

void Store::persist(size_t outer_from, size_t body_from, uint32_t region_top,
                    std::vector<TrailEntry>& log) {
  auto by_index = [](const TrailEntry& a, const TrailEntry& b) {
    return a.index < b.index;
  };
  // Earliest body entry per written cell; its prior is the state the body
  // started from.
  std::vector<TrailEntry> written;
  for (size_t k = body_from; k < trail_.size(); ++k)
    if (trail_[k].index < region_top) written.push_back(trail_[k]);
  trail_.resize(body_from);
  if (written.empty()) return;
  std::stable_sort(written.begin(), written.end(), by_index);
  written.erase(std::unique(written.begin(), written.end(),
                            [](const TrailEntry& a, const TrailEntry& b) {
                              return a.index == b.index;
                            }),
                written.end());

  auto find = [&](uint32_t i) {
    auto it = std::lower_bound(written.begin(), written.end(), TrailEntry{i, {}},
                               by_index);
    return it != written.end() && it->index == i ? it : written.end();
  };

  // The state at outer_from is the prior of the earliest outer entry for
  // the cell, or the body's starting state when the outer range never
  // touched it.
  std::vector<bool> seen(written.size(), false);
  std::vector<TrailEntry> fresh;
  for (size_t k = outer_from; k < body_from; ++k) {
    auto it = find(trail_[k].index);
    if (it == written.end()) continue;
    size_t pos = static_cast<size_t>(it - written.begin());
    if (!seen[pos]) {
      seen[pos] = true;
      fresh.push_back(trail_[k]);
    }
    trail_[k].prior = cells_[trail_[k].index];
  }
  for (size_t pos = 0; pos < written.size(); ++pos)
    if (!seen[pos]) fresh.push_back(written[pos]);

  std::sort(fresh.begin(), fresh.end(), by_index);
  std::erase_if(fresh, [&](const TrailEntry& e) {
    return std::binary_search(log.begin(), log.end(), e, by_index);
  });
  if (fresh.empty()) return;
  size_t mid = log.size();
  log.insert(log.end(), fresh.begin(), fresh.end());
  std::inplace_merge(log.begin(), log.begin() + static_cast<ptrdiff_t>(mid),
                     log.end(), by_index);
}

void Store::restore(const std::vector<TrailEntry>& log) {
  for (const TrailEntry& e : log) cells_[e.index] = e.prior;
}

void Store::record(const std::vector<TrailEntry>& log) {
  uint32_t limit = hb();
  for (const TrailEntry& e : log)
    if (e.index < limit) trail_.push_back(e);
}

}  // namespace alma::store
