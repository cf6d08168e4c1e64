#pragma once

namespace elfarol {

inline constexpr const char* kEngineVersion = "0.1.0";
inline constexpr int kTraceSchemaVersion = 1;

}  // namespace elfarol
