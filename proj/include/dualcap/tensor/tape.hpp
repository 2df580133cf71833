#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace dualcap {

// Ordered record of executed operations for one forward pass. Operations
// append themselves while a tape is active; backward() replays the record in
// reverse, visiting every node exactly once, then discards it. Tapes and the
// tensors recorded on them are confined to one thread.
class Tape {
 public:
  struct Node {
    std::function<void()> zero_output_grad;
    std::function<void()> backprop;
  };

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  std::size_t size() const { return nodes_.size(); }
  void clear() { nodes_.clear(); }

  void push(Node node) { nodes_.push_back(std::move(node)); }

  // Replays all nodes in reverse execution order and clears the tape.
  // Returns the number of nodes visited.
  std::size_t replay_reverse() {
    for (auto& node : nodes_) node.zero_output_grad();
    return replay_reverse_preseeded();
  }

  // As replay_reverse(), but the caller has already zeroed the intermediate
  // gradients and seeded the starting one.
  std::size_t replay_reverse_preseeded() {
    std::size_t visited = 0;
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
      it->backprop();
      ++visited;
    }
    clear();
    return visited;
  }

  void zero_intermediate_grads() {
    for (auto& node : nodes_) node.zero_output_grad();
  }

  static Tape* active();

 private:
  friend class TapeScope;
  friend class TapeSuspend;
  std::vector<Node> nodes_;
};

// Makes a tape the active recording target for the current thread.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* prev_;
};

// Temporarily disables recording (inference inside a training loop).
class TapeSuspend {
 public:
  TapeSuspend();
  ~TapeSuspend();
  TapeSuspend(const TapeSuspend&) = delete;
  TapeSuspend& operator=(const TapeSuspend&) = delete;

 private:
  Tape* prev_;
};

}  // namespace dualcap
