#pragma once

#include <functional>
#include <string>

namespace osem {

using WarningSink = std::function<void(const std::string&)>;

// Default sink writes "osem: warning: ..." to stderr.
void set_warning_sink(WarningSink sink);
void warn(const std::string& message);
std::size_t warning_count();

}  // namespace osem
