#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mono3d/types.hpp"

namespace mono3d {

/// Parses a KITTI label/prediction file: one object per line, 15 fields
/// (labels) or 16 fields (predictions, trailing score). DontCare rows are
/// retained. Throws ParseError with line/field position on malformed input.
std::vector<ObjectLabel> parse_label_file(std::string_view text);

/// Parses a KITTI calibration file and extracts the P2 matrix. Other lines
/// (P0, P1, R0_rect, ...) are ignored. Throws ParseError if P2 is missing
/// or a token is not numeric.
Calibration parse_calib_file(std::string_view text);

/// Parses a raw-outputs sidecar: a JSON array of records, one per detected
/// object, keys matching RawHeadOutputs. Unknown keys are ignored; missing
/// required keys, wrong logit counts and non-positive depth/sigma are errors.
std::vector<RawHeadOutputs> parse_raw_outputs(std::string_view text);

/// Serializes objects in KITTI layout, all reals at 2 decimal places.
/// parse_label_file(write_label_file(v)) == v after 2-decimal quantization.
std::string write_label_file(std::span<const ObjectLabel> objects);

}  // namespace mono3d
