#pragma once

#include <string>

#include "encplan/model.hpp"

namespace encplan {

struct MpsExportInfo {
  bool mangled = false;
  std::string names_path;  // sidecar map, empty when names were kept
};

/// Writes `model` in fixed-format MPS. Names that do not fit the 8-character
/// fields are replaced by C0000001/R0000001 style names and the original names
/// are written to `<path>.names` (kind,mangled,original per line). Numbers are
/// written with 12 significant digits. A nonempty `header_comment` becomes the
/// first line of both files.
MpsExportInfo export_mps(const MilpModel& model, const std::string& path, const std::string& header_comment = "");

/// Reads a file produced by export_mps (or any whitespace-separable fixed MPS).
/// Restores original names from `<path>.names` when that file exists.
MilpModel import_mps(const std::string& path);

}  // namespace encplan
