#include "pifeat/errors.hpp"

#include <iostream>
#include <mutex>
#include <utility>

namespace pifeat {

namespace {
std::mutex g_warn_mutex;
WarnHandler g_warn_handler;
}  // namespace

void set_warn_handler(WarnHandler handler) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  g_warn_handler = std::move(handler);
}

void warn(const std::string& message) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  if (g_warn_handler) {
    g_warn_handler(message);
  } else {
    std::cerr << "warning: " << message << "\n";
  }
}

}  // namespace pifeat
