#pragma once

namespace dephaskit {
inline constexpr const char* kVersion = "0.3.0";
}
