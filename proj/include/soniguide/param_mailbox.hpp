#ifndef SONIGUIDE_PARAM_MAILBOX_HPP
#define SONIGUIDE_PARAM_MAILBOX_HPP

#include "soniguide/mapping.hpp"

#include <cstdint>
#include <mutex>

namespace soniguide {

// Latest-value handoff between a parameter writer and the block renderer.
// Frames are published and read whole; a reader never sees half a frame.
class ParamMailbox {
 public:
  struct Snapshot {
    SoniParams params;
    std::uint64_t version = 0;  // 0 until the first publish
  };

  void publish(const SoniParams& params) {
    std::lock_guard lock(mutex_);
    latest_.params = params;
    ++latest_.version;
  }

  Snapshot read() const {
    std::lock_guard lock(mutex_);
    return latest_;
  }

 private:
  mutable std::mutex mutex_;
  Snapshot latest_;
};

}  // namespace soniguide

#endif  // SONIGUIDE_PARAM_MAILBOX_HPP
