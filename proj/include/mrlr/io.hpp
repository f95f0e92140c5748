#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mrlr/experiments.hpp"
#include "mrlr/mrlr.hpp"
#include "mrlr/tensor.hpp"

namespace mrlr {

/// Malformed, truncated, or unreadable files.
class io_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor file: one ASCII header line "MRLR1 I N1 ... NI\n" followed by
// prod(N_i) doubles, 64-bit little-endian, in colexicographic order.
//
// Model file: header line "MRLRM1 I N1 ... NI L\n", then per stage a
// "stage <groups> <rank>\n" line, one "group <size> <modes...>\n" line per
// group, and per group a "factor <rows> <cols>\n" line followed by
// rows*cols doubles (column-major, 64-bit little-endian).

DenseTensor read_tensor(const std::string& path);
void write_tensor(const std::string& path, const DenseTensor& X);

MrlrModel read_model(const std::string& path);
void write_model(const std::string& path, const MrlrModel& model);

/// Parses "1,2|3" into {{1,2},{3}}; groups separated by '|', 1-based mode
/// indices by ','. Validation against a tensor order happens at use.
ModePartition parse_partition(const std::string& spec);
std::string format_partition(const ModePartition& P);

/// Parses stage partitions separated by ';', e.g. "1,2|3;1|2|3".
std::vector<ModePartition> parse_plan_partitions(const std::string& spec);

/// Real formatted with 9 significant digits.
std::string format_real(double value);

/// Emits the sweep/report CSV: header line
/// "method,stage_ranks,params,nfe,sweeps,seconds,seed", stage ranks joined
/// with '+', reals with 9 significant digits, rows sorted by (method, params).
void write_sweep_csv(std::ostream& os, std::vector<SweepRow> rows);

/// Per-stage rows (cumulative params, NFE after the stage) for a fit report.
std::vector<SweepRow> report_rows(const MrlrModel& model,
                                  const FitReport& report,
                                  const std::string& method);

}  // namespace mrlr
