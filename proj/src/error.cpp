#include "lecturedeck/error.hpp"

namespace lecturedeck {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid_input";
    case ErrorCode::Io: return "io";
    case ErrorCode::Format: return "format";
    case ErrorCode::Transport: return "transport";
    case ErrorCode::Consistency: return "consistency";
    case ErrorCode::Conflict: return "conflict";
    case ErrorCode::NotFound: return "not_found";
    case ErrorCode::CorruptStore: return "corrupt_store";
    case ErrorCode::Bind: return "bind";
    case ErrorCode::Usage: return "usage";
  }
  return "unknown";
}

}  // namespace lecturedeck
