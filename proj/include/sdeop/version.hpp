#pragma once

namespace sdeop {

// Tool version embedded in every output file header.
inline constexpr const char* kToolVersion = "0.1.0";

// On-disk format versions.  Readers reject anything else explicitly.
inline constexpr int kDatasetFormatVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kReportFormatVersion = 1;

}  // namespace sdeop
