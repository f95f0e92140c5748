#include "mrlr/io.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "tensor/model payloads are little-endian");

namespace mrlr {

namespace {

constexpr const char* kTensorMagic = "MRLR1";
constexpr const char* kModelMagic = "MRLRM1";

std::string header_line(std::istream& in, const std::string& path) {
  std::string line;
  if (!std::getline(in, line))
    throw io_error(path + ": truncated header (no newline found)");
  return line;
}

// Tokenized text record; reports the record's byte offset on errors.
class Record {
 public:
  Record(std::string line, std::streamoff offset, std::string path)
      : stream_(std::move(line)), offset_(offset), path_(std::move(path)) {}

  std::string word(const char* what) {
    std::string tok;
    if (!(stream_ >> tok)) fail(std::string("missing ") + what);
    return tok;
  }

  long long integer(const char* what) {
    const std::string tok = word(what);
    try {
      std::size_t pos = 0;
      const long long v = std::stoll(tok, &pos);
      if (pos != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(std::string("bad ") + what + " '" + tok + "'");
    }
  }

  void done() {
    std::string extra;
    if (stream_ >> extra) fail("unexpected trailing token '" + extra + "'");
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw io_error(path_ + ": " + msg + " (record starting at byte " +
                   std::to_string(offset_) + ")");
  }

 private:
  std::istringstream stream_;
  std::streamoff offset_;
  std::string path_;
};

Record read_record(std::istream& in, const std::string& path) {
  const std::streamoff offset = in.tellg();
  return {header_line(in, path), offset, path};
}

void read_payload(std::istream& in, const std::string& path, double* out,
                  Index count) {
  const std::streamoff offset = in.tellg();
  in.read(reinterpret_cast<char*>(out),
          static_cast<std::streamsize>(count) * 8);
  if (in.gcount() != static_cast<std::streamsize>(count) * 8)
    throw io_error(path + ": truncated payload: expected " +
                   std::to_string(count * 8) + " bytes at byte " +
                   std::to_string(offset) + ", found " +
                   std::to_string(in.gcount()));
}

void expect_eof(std::istream& in, const std::string& path) {
  const std::streamoff offset = in.tellg();
  if (in.peek() != std::istream::traits_type::eof())
    throw io_error(path + ": unexpected trailing data at byte " +
                   std::to_string(offset));
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error(path + ": cannot open for reading");
  return in;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error(path + ": cannot open for writing");
  return out;
}

Shape read_shape(Record& rec, Index order) {
  if (order < 1) rec.fail("order must be >= 1");
  Shape shape;
  for (Index i = 0; i < order; ++i) {
    const long long n = rec.integer("mode size");
    if (n < 1) rec.fail("mode sizes must be >= 1");
    shape.push_back(static_cast<Index>(n));
  }
  return shape;
}

}  // namespace

DenseTensor read_tensor(const std::string& path) {
  std::ifstream in = open_in(path);
  Record rec = read_record(in, path);
  if (rec.word("magic") != kTensorMagic) rec.fail("bad magic (want MRLR1)");
  const Shape shape = read_shape(rec, rec.integer("order"));
  rec.done();

  DenseTensor X(shape);
  read_payload(in, path, X.data().data(), X.size());
  expect_eof(in, path);
  return X;
}

void write_tensor(const std::string& path, const DenseTensor& X) {
  shape_product(X.shape());
  std::ofstream out = open_out(path);
  out << kTensorMagic << ' ' << X.order();
  for (Index n : X.shape()) out << ' ' << n;
  out << '\n';
  out.write(reinterpret_cast<const char*>(X.data().data()), X.size() * 8);
  if (!out) throw io_error(path + ": write failed");
}

MrlrModel read_model(const std::string& path) {
  std::ifstream in = open_in(path);
  Record header = read_record(in, path);
  if (header.word("magic") != kModelMagic) header.fail("bad magic (want MRLRM1)");
  const Shape shape = read_shape(header, header.integer("order"));
  const long long stage_count = header.integer("stage count");
  if (stage_count < 1) header.fail("stage count must be >= 1");
  header.done();

  MrlrModel model;
  model.shape = shape;
  for (long long s = 0; s < stage_count; ++s) {
    Record stage_rec = read_record(in, path);
    if (stage_rec.word("keyword") != "stage") stage_rec.fail("expected 'stage'");
    const long long group_count = stage_rec.integer("group count");
    const long long rank = stage_rec.integer("rank");
    if (group_count < 1) stage_rec.fail("group count must be >= 1");
    if (rank < 1) stage_rec.fail("rank must be >= 1");
    stage_rec.done();

    MrlrStage stage;
    for (long long g = 0; g < group_count; ++g) {
      Record group_rec = read_record(in, path);
      if (group_rec.word("keyword") != "group") group_rec.fail("expected 'group'");
      const long long size = group_rec.integer("group size");
      if (size < 1) group_rec.fail("group size must be >= 1");
      std::vector<int> group;
      for (long long i = 0; i < size; ++i)
        group.push_back(static_cast<int>(group_rec.integer("mode index")));
      group_rec.done();
      stage.partition.groups.push_back(std::move(group));
    }
    try {
      stage.partition.validate(static_cast<Index>(shape.size()));
    } catch (const validation_error& e) {
      throw io_error(path + ": invalid stage partition: " + e.what());
    }
    const Shape reshaped = stage.partition.reshaped_shape(shape);

    stage.factors.rank = static_cast<Index>(rank);
    for (long long g = 0; g < group_count; ++g) {
      Record fac_rec = read_record(in, path);
      if (fac_rec.word("keyword") != "factor") fac_rec.fail("expected 'factor'");
      const long long rows = fac_rec.integer("rows");
      const long long cols = fac_rec.integer("cols");
      fac_rec.done();
      if (rows != reshaped[static_cast<std::size_t>(g)])
        fac_rec.fail("factor rows do not match the group's merged mode size");
      if (cols != rank) fac_rec.fail("factor cols do not match the stage rank");
      Matrix f(rows, cols);
      read_payload(in, path, f.data(), f.size());
      stage.factors.factors.push_back(std::move(f));
    }
    model.stages.push_back(std::move(stage));
  }
  expect_eof(in, path);
  return model;
}

void write_model(const std::string& path, const MrlrModel& model) {
  if (model.stages.empty())
    throw validation_error("model has no stages");
  std::ofstream out = open_out(path);
  out << kModelMagic << ' ' << model.shape.size();
  for (Index n : model.shape) out << ' ' << n;
  out << ' ' << model.stages.size() << '\n';
  for (const MrlrStage& stage : model.stages) {
    stage.partition.validate(static_cast<Index>(model.shape.size()));
    stage.factors.validate();
    out << "stage " << stage.partition.group_count() << ' '
        << stage.factors.rank << '\n';
    for (const auto& group : stage.partition.groups) {
      out << "group " << group.size();
      for (int mode : group) out << ' ' << mode;
      out << '\n';
    }
    for (const Matrix& f : stage.factors.factors) {
      out << "factor " << f.rows() << ' ' << f.cols() << '\n';
      out.write(reinterpret_cast<const char*>(f.data()), f.size() * 8);
    }
  }
  if (!out) throw io_error(path + ": write failed");
}

namespace {

// Splits on the delimiter keeping empty segments, so stray separators
// ("1,|2", "1|", ";") surface as parse errors instead of vanishing.
std::vector<std::string> split(const std::string& s, char delim) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  for (;;) {
    const std::size_t next = s.find(delim, pos);
    out.push_back(s.substr(pos, next - pos));
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

}  // namespace

ModePartition parse_partition(const std::string& spec) {
  ModePartition P;
  for (const std::string& group : split(spec, '|')) {
    std::vector<int> modes;
    for (const std::string& item : split(group, ',')) {
      if (item.empty())
        throw validation_error("partition spec '" + spec + "': empty group");
      try {
        std::size_t pos = 0;
        const int mode = std::stoi(item, &pos);
        if (pos != item.size()) throw std::invalid_argument(item);
        modes.push_back(mode);
      } catch (const std::exception&) {
        throw validation_error("partition spec '" + spec +
                               "': bad mode index '" + item + "'");
      }
    }
    P.groups.push_back(std::move(modes));
  }
  return P;
}

std::string format_partition(const ModePartition& P) {
  std::string out;
  for (std::size_t g = 0; g < P.groups.size(); ++g) {
    if (g) out += '|';
    for (std::size_t i = 0; i < P.groups[g].size(); ++i) {
      if (i) out += ',';
      out += std::to_string(P.groups[g][i]);
    }
  }
  return out;
}

std::vector<ModePartition> parse_plan_partitions(const std::string& spec) {
  std::vector<ModePartition> out;
  for (const std::string& stage : split(spec, ';'))
    out.push_back(parse_partition(stage));
  return out;
}

std::string format_real(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", value);
  return buf;
}

void write_sweep_csv(std::ostream& os, std::vector<SweepRow> rows) {
  std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) {
    return std::tie(a.method, a.params, a.seed) <
           std::tie(b.method, b.params, b.seed);
  });
  os << "method,stage_ranks,params,nfe,sweeps,seconds,seed\n";
  for (const SweepRow& row : rows) {
    os << row.method << ',';
    for (std::size_t i = 0; i < row.stage_ranks.size(); ++i) {
      if (i) os << '+';
      os << row.stage_ranks[i];
    }
    os << ',' << row.params << ',' << format_real(row.nfe) << ',' << row.sweeps
       << ',' << format_real(row.seconds) << ',' << row.seed << '\n';
  }
}

std::vector<SweepRow> report_rows(const MrlrModel& model,
                                  const FitReport& report,
                                  const std::string& method) {
  std::vector<SweepRow> rows;
  std::vector<Index> ranks;
  for (std::size_t i = 0; i < model.stages.size(); ++i) {
    ranks.push_back(model.stages[i].factors.rank);
    SweepRow row;
    row.method = method;
    row.stage_ranks = ranks;
    row.params = report.cumulative_params[i];
    row.nfe = report.stage_nfe[i];
    row.sweeps = report.stage_sweeps[i];
    row.seconds = report.stage_seconds[i];
    row.seed = report.seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace mrlr
