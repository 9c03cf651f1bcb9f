#pragma once

#include <string>
#include <vector>

namespace forlaps {

/// Collects non-fatal warnings raised by library routines. Routines take an
/// optional pointer; passing nullptr discards warnings.
class Warnings {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }
  const std::vector<std::string>& messages() const noexcept { return messages_; }
  bool empty() const noexcept { return messages_.empty(); }
  std::size_t size() const noexcept { return messages_.size(); }
  void clear() noexcept { messages_.clear(); }

 private:
  std::vector<std::string> messages_;
};

inline void warn(Warnings* sink, std::string message) {
  if (sink != nullptr) sink->add(std::move(message));
}

}  // namespace forlaps
