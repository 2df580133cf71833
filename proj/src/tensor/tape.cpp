#include "dualcap/tensor/tape.hpp"

namespace dualcap {

namespace {
thread_local Tape* g_active_tape = nullptr;
}

Tape* Tape::active() { return g_active_tape; }

TapeScope::TapeScope(Tape& tape) : prev_(g_active_tape) { g_active_tape = &tape; }
TapeScope::~TapeScope() { g_active_tape = prev_; }

TapeSuspend::TapeSuspend() : prev_(g_active_tape) { g_active_tape = nullptr; }
TapeSuspend::~TapeSuspend() { g_active_tape = prev_; }

}  // namespace dualcap
