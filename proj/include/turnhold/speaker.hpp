#pragma once

#include <string>
#include <string_view>

#include "turnhold/error.hpp"

namespace turnhold {

// The two channels of a dialog. Everything (words, dialog acts, activity
// frames, audio channels) is keyed by one of these.
enum class Speaker : int { A = 0, B = 1 };

inline constexpr Speaker other(Speaker s) {
  return s == Speaker::A ? Speaker::B : Speaker::A;
}

inline constexpr int index(Speaker s) { return static_cast<int>(s); }

inline constexpr char to_char(Speaker s) { return s == Speaker::A ? 'A' : 'B'; }

inline std::string to_string(Speaker s) { return std::string(1, to_char(s)); }

inline Speaker parse_speaker(std::string_view v) {
  if (v == "A") return Speaker::A;
  if (v == "B") return Speaker::B;
  throw ValidationError("speaker must be \"A\" or \"B\", got \"" + std::string(v) + "\"");
}

}  // namespace turnhold
