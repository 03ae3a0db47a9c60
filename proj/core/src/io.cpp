#include "alsel/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace alsel {

namespace {

using json = nlohmann::ordered_json;

constexpr char kMagic[4] = {'A', 'L', 'T', 'F'};
constexpr std::uint16_t kVersion = 1;
constexpr std::uint8_t kDtypeFloat32 = 0;

std::string path_str(const std::filesystem::path& path) { return path.string(); }

void append_u16(std::string& out, std::uint16_t value) {
  out.push_back(static_cast<char>(value & 0xFF));
  out.push_back(static_cast<char>((value >> 8) & 0xFF));
}

void append_u64(std::string& out, std::uint64_t value) {
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((value >> shift) & 0xFF));
  }
}

void append_f32(std::string& out, float value) {
  const auto bits = std::bit_cast<std::uint32_t>(value);
  for (int shift = 0; shift < 32; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xFF));
  }
}

class Reader {
 public:
  Reader(std::string data, std::filesystem::path path)
      : data_(std::move(data)), path_(std::move(path)) {}

  std::size_t remaining() const { return data_.size() - pos_; }

  void read_bytes(void* out, std::size_t count, const char* what) {
    if (remaining() < count) {
      throw IoError(IoError::Kind::Truncated,
                    path_str(path_) + ": truncated " + what + ": expected " +
                        std::to_string(count) + " bytes, got " + std::to_string(remaining()));
    }
    std::memcpy(out, data_.data() + pos_, count);
    pos_ += count;
  }

  std::uint8_t read_u8(const char* what) {
    std::uint8_t v = 0;
    read_bytes(&v, 1, what);
    return v;
  }

  std::uint16_t read_u16(const char* what) {
    std::uint8_t b[2];
    read_bytes(b, 2, what);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }

  std::uint64_t read_u64(const char* what) {
    std::uint8_t b[8];
    read_bytes(b, 8, what);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
  }

  const std::filesystem::path& path() const { return path_; }

 private:
  std::string data_;
  std::size_t pos_ = 0;
  std::filesystem::path path_;
};

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError(IoError::Kind::OpenFailed, "cannot open " + path_str(path));
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return std::move(buffer).str();
}

void spit(const std::filesystem::path& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(IoError::Kind::WriteFailed, "cannot open " + path_str(path) + " for writing");
  }
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) {
    throw IoError(IoError::Kind::WriteFailed, "write failed for " + path_str(path));
  }
}

std::string tensor_header(std::uint8_t rank, std::span<const std::uint64_t> dims) {
  std::string out;
  out.append(kMagic, 4);
  append_u16(out, kVersion);
  out.push_back(static_cast<char>(rank));
  for (std::uint64_t dim : dims) append_u64(out, dim);
  out.push_back(static_cast<char>(kDtypeFloat32));
  return out;
}

std::vector<float> read_payload(Reader& reader, std::span<const std::uint64_t> dims) {
  std::uint64_t count = 1;
  for (std::uint64_t dim : dims) {
    if (dim == 0 || count > std::numeric_limits<std::uint64_t>::max() / dim) {
      throw IoError(IoError::Kind::BadRank,
                    path_str(reader.path()) + ": invalid dimension " + std::to_string(dim));
    }
    count *= dim;
  }
  if (count > (std::numeric_limits<std::size_t>::max() / 4)) {
    throw IoError(IoError::Kind::Truncated,
                  path_str(reader.path()) + ": payload too large to address");
  }
  const std::size_t bytes = static_cast<std::size_t>(count) * 4;
  if (reader.remaining() != bytes) {
    throw IoError(IoError::Kind::Truncated,
                  path_str(reader.path()) + ": payload length mismatch: expected " +
                      std::to_string(bytes) + " bytes, got " + std::to_string(reader.remaining()));
  }
  std::vector<float> values(static_cast<std::size_t>(count));
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::uint8_t b[4];
    reader.read_bytes(b, 4, "payload");
    const std::uint32_t bits = static_cast<std::uint32_t>(b[0]) |
                               (static_cast<std::uint32_t>(b[1]) << 8) |
                               (static_cast<std::uint32_t>(b[2]) << 16) |
                               (static_cast<std::uint32_t>(b[3]) << 24);
    values[i] = std::bit_cast<float>(bits);
  }
  return values;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

Tensor read_tensor(const std::filesystem::path& path, std::size_t min_augmentations) {
  Reader reader(slurp(path), path);
  char magic[4];
  reader.read_bytes(magic, 4, "header");
  if (std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError(IoError::Kind::BadMagic,
                  path_str(path) + ": bad magic, not an ALTF tensor file");
  }
  const std::uint16_t version = reader.read_u16("header");
  if (version != kVersion) {
    throw IoError(IoError::Kind::UnsupportedVersion,
                  path_str(path) + ": unsupported version " + std::to_string(version));
  }
  const std::uint8_t rank = reader.read_u8("header");
  if (rank != 2 && rank != 3) {
    throw IoError(IoError::Kind::BadRank,
                  path_str(path) + ": rank must be 2 or 3, got " + std::to_string(rank));
  }
  std::vector<std::uint64_t> dims(rank);
  for (std::uint64_t& dim : dims) dim = reader.read_u64("header");
  const std::uint8_t dtype = reader.read_u8("header");
  if (dtype != kDtypeFloat32) {
    throw IoError(IoError::Kind::BadDtype,
                  path_str(path) + ": unsupported dtype " + std::to_string(dtype));
  }
  std::vector<float> values = read_payload(reader, dims);

  if (rank == 2) {
    EmbeddingMatrix matrix(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                           std::move(values));
    validate(matrix);
    return matrix;
  }
  PredictionTensor tensor(static_cast<std::size_t>(dims[0]), static_cast<std::size_t>(dims[1]),
                          static_cast<std::size_t>(dims[2]), std::move(values));
  validate(tensor, min_augmentations);
  return tensor;
}

EmbeddingMatrix read_matrix(const std::filesystem::path& path) {
  Tensor tensor = read_tensor(path);
  if (auto* matrix = std::get_if<EmbeddingMatrix>(&tensor)) {
    return std::move(*matrix);
  }
  throw IoError(IoError::Kind::BadRank, path_str(path) + ": expected a rank-2 tensor");
}

PredictionTensor read_prediction_tensor(const std::filesystem::path& path,
                                        std::size_t min_augmentations) {
  Tensor tensor = read_tensor(path, min_augmentations);
  if (auto* predictions = std::get_if<PredictionTensor>(&tensor)) {
    return std::move(*predictions);
  }
  throw IoError(IoError::Kind::BadRank, path_str(path) + ": expected a rank-3 tensor");
}

void write_tensor(const EmbeddingMatrix& matrix, const std::filesystem::path& path) {
  const std::uint64_t dims[2] = {matrix.n_samples(), matrix.dim()};
  std::string out = tensor_header(2, dims);
  out.reserve(out.size() + matrix.values().size() * 4);
  for (float v : matrix.values()) append_f32(out, v);
  spit(path, out);
}

void write_tensor(const PredictionTensor& tensor, const std::filesystem::path& path) {
  const std::uint64_t dims[3] = {tensor.n_samples(), tensor.n_augmentations(),
                                 tensor.n_classes()};
  std::string out = tensor_header(3, dims);
  out.reserve(out.size() + tensor.values().size() * 4);
  for (float v : tensor.values()) append_f32(out, v);
  spit(path, out);
}

void write_tensor(const VarianceMatrix& matrix, const std::filesystem::path& path) {
  const std::uint64_t dims[2] = {matrix.n_samples(), matrix.n_classes()};
  std::string out = tensor_header(2, dims);
  out.reserve(out.size() + matrix.values().size() * 4);
  for (double v : matrix.values()) append_f32(out, static_cast<float>(v));
  spit(path, out);
}

EmbeddingMatrix read_csv_matrix(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  std::vector<float> values;
  std::size_t n_rows = 0;
  std::size_t n_cols = 0;

  std::size_t line_start = 0;
  std::size_t line_number = 0;
  while (line_start < data.size()) {
    std::size_t line_end = data.find('\n', line_start);
    if (line_end == std::string::npos) line_end = data.size();
    ++line_number;
    const std::string_view line = trim(std::string_view(data).substr(line_start, line_end - line_start));
    line_start = line_end + 1;
    if (line.empty()) continue;

    std::size_t cols = 0;
    std::size_t cell_start = 0;
    while (cell_start <= line.size()) {
      std::size_t cell_end = line.find(',', cell_start);
      if (cell_end == std::string_view::npos) cell_end = line.size();
      const std::string_view cell = trim(line.substr(cell_start, cell_end - cell_start));
      ++cols;
      float value = 0.0f;
      const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
      if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        throw IoError(IoError::Kind::BadToken,
                      path_str(path) + ": invalid number '" + std::string(cell) + "' at line " +
                          std::to_string(line_number) + ", column " + std::to_string(cols));
      }
      values.push_back(value);
      cell_start = cell_end + 1;
      if (cell_end == line.size()) break;
    }

    if (n_rows == 0) {
      n_cols = cols;
    } else if (cols != n_cols) {
      throw IoError(IoError::Kind::RaggedRow,
                    path_str(path) + ": ragged row at line " + std::to_string(line_number) +
                        ": expected " + std::to_string(n_cols) + " columns, got " +
                        std::to_string(cols));
    }
    ++n_rows;
  }

  EmbeddingMatrix matrix(n_rows, n_cols, std::move(values));
  validate(matrix);
  return matrix;
}

IndexSet read_index_set(const std::filesystem::path& path) {
  const std::string data = slurp(path);
  IndexSet set;
  std::size_t line_start = 0;
  std::size_t line_number = 0;
  while (line_start < data.size()) {
    std::size_t line_end = data.find('\n', line_start);
    if (line_end == std::string::npos) line_end = data.size();
    ++line_number;
    const std::string_view line = trim(std::string_view(data).substr(line_start, line_end - line_start));
    line_start = line_end + 1;
    if (line.empty()) continue;

    std::uint64_t value = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
    if (ec != std::errc() || ptr != line.data() + line.size()) {
      throw IoError(IoError::Kind::BadToken,
                    path_str(path) + ": expected a non-negative integer at line " +
                        std::to_string(line_number) + ", got '" + std::string(line) + "'");
    }
    try {
      set.add(static_cast<std::size_t>(value));
    } catch (const ValidationError&) {
      throw IoError(IoError::Kind::DuplicateIndex,
                    path_str(path) + ": duplicate index " + std::to_string(value) + " at line " +
                        std::to_string(line_number));
    }
  }
  return set;
}

void write_index_set(const IndexSet& set, const std::filesystem::path& path) {
  std::string out;
  for (std::size_t index : set) {
    out += std::to_string(index);
    out += '\n';
  }
  spit(path, out);
}

// --- JSON ------------------------------------------------------------------

namespace {

[[noreturn]] void bad_config(const std::string& detail) {
  throw IoError(IoError::Kind::BadConfig, "invalid simulation config: " + detail);
}

template <typename T>
T get_field(const json& object, const char* key, T fallback) {
  if (!object.contains(key)) return fallback;
  try {
    return object.at(key).get<T>();
  } catch (const json::exception&) {
    bad_config(std::string("field '") + key + "' has the wrong type");
  }
}

Temperature temperature_from_json(const json& value) {
  if (value.is_string()) return Temperature::parse(value.get<std::string>());
  if (value.is_number()) return Temperature::finite(value.get<double>());
  bad_config("'temperature' must be a positive number or \"greedy\"");
}

json temperature_to_json(const Temperature& temperature) {
  if (temperature.is_greedy()) return json("greedy");
  return json(temperature.value());
}

}  // namespace

SimConfig parse_sim_config(const std::string& json_text) {
  json parsed;
  try {
    parsed = json::parse(json_text);
  } catch (const json::exception& e) {
    bad_config(e.what());
  }
  if (!parsed.is_object()) bad_config("top level must be an object");

  static const char* known_keys[] = {
      "n_samples",      "dim",           "n_classes",        "cluster_spread",
      "label_noise",    "initial_budget", "cycle_budgets",   "n_augmentations",
      "augmentation_noise", "strategies", "seeds",           "learner",
      "initial_selection", "temperature", "consistency_seed_with_labeled"};
  for (const auto& [key, value] : parsed.items()) {
    bool known = false;
    for (const char* k : known_keys) {
      if (key == k) known = true;
    }
    if (!known) bad_config("unknown key '" + key + "'");
  }

  SimConfig config;
  config.n_samples = get_field<std::size_t>(parsed, "n_samples", config.n_samples);
  config.dim = get_field<std::size_t>(parsed, "dim", config.dim);
  config.n_classes = get_field<std::size_t>(parsed, "n_classes", config.n_classes);
  config.cluster_spread = get_field<double>(parsed, "cluster_spread", config.cluster_spread);
  config.label_noise = get_field<double>(parsed, "label_noise", config.label_noise);
  config.initial_budget = get_field<std::size_t>(parsed, "initial_budget", config.initial_budget);
  config.cycle_budgets =
      get_field<std::vector<std::size_t>>(parsed, "cycle_budgets", config.cycle_budgets);
  config.n_augmentations =
      get_field<std::size_t>(parsed, "n_augmentations", config.n_augmentations);
  config.augmentation_noise =
      get_field<double>(parsed, "augmentation_noise", config.augmentation_noise);
  config.seeds = get_field<std::vector<std::uint64_t>>(parsed, "seeds", config.seeds);
  config.consistency_seed_with_labeled = get_field<bool>(
      parsed, "consistency_seed_with_labeled", config.consistency_seed_with_labeled);

  if (parsed.contains("strategies")) {
    config.strategies.clear();
    if (!parsed["strategies"].is_array()) bad_config("'strategies' must be an array of names");
    for (const auto& name : parsed["strategies"]) {
      if (!name.is_string()) bad_config("'strategies' must be an array of names");
      try {
        config.strategies.push_back(strategy_from_name(name.get<std::string>()));
      } catch (const ValidationError& e) {
        bad_config(e.what());
      }
    }
  }
  if (parsed.contains("learner")) {
    const json& learner = parsed["learner"];
    if (!learner.is_object()) bad_config("'learner' must be an object");
    for (const auto& [key, value] : learner.items()) {
      if (key != "epochs" && key != "learning_rate" && key != "l2_penalty") {
        bad_config("unknown key 'learner." + key + "'");
      }
    }
    config.learner.epochs = get_field<std::size_t>(learner, "epochs", config.learner.epochs);
    config.learner.learning_rate =
        get_field<double>(learner, "learning_rate", config.learner.learning_rate);
    config.learner.l2_penalty =
        get_field<double>(learner, "l2_penalty", config.learner.l2_penalty);
  }
  if (parsed.contains("initial_selection")) {
    if (!parsed["initial_selection"].is_string()) {
      bad_config("'initial_selection' must be \"random\" or \"initial-diversity\"");
    }
    try {
      config.initial_selection =
          initial_selection_from_name(parsed["initial_selection"].get<std::string>());
    } catch (const ValidationError& e) {
      bad_config(e.what());
    }
  }
  if (parsed.contains("temperature")) {
    try {
      config.temperature = temperature_from_json(parsed["temperature"]);
    } catch (const ValidationError& e) {
      bad_config(e.what());
    }
  }
  return config;
}

SimConfig load_sim_config(const std::filesystem::path& path) {
  return parse_sim_config(slurp(path));
}

namespace {

json config_to_json_object(const SimConfig& config) {
  json object;
  object["n_samples"] = config.n_samples;
  object["dim"] = config.dim;
  object["n_classes"] = config.n_classes;
  object["cluster_spread"] = config.cluster_spread;
  object["label_noise"] = config.label_noise;
  object["initial_budget"] = config.initial_budget;
  object["cycle_budgets"] = config.cycle_budgets;
  object["n_augmentations"] = config.n_augmentations;
  object["augmentation_noise"] = config.augmentation_noise;
  json strategies = json::array();
  for (Strategy s : config.strategies) strategies.push_back(std::string(to_string(s)));
  object["strategies"] = strategies;
  object["seeds"] = config.seeds;
  object["learner"] = {{"epochs", config.learner.epochs},
                       {"learning_rate", config.learner.learning_rate},
                       {"l2_penalty", config.learner.l2_penalty}};
  object["initial_selection"] = std::string(to_string(config.initial_selection));
  object["temperature"] = temperature_to_json(config.temperature);
  object["consistency_seed_with_labeled"] = config.consistency_seed_with_labeled;
  return object;
}

}  // namespace

std::string sim_config_to_json(const SimConfig& config) {
  return config_to_json_object(config).dump(2) + "\n";
}

std::string report_to_json(const ALExperimentReport& report) {
  json object;
  object["config"] = config_to_json_object(report.config);

  json runs = json::array();
  for (const RunRecord& run : report.runs) {
    json cycles = json::array();
    for (const CycleRecord& cycle : run.cycles) {
      cycles.push_back({{"cycle", cycle.cycle},
                        {"labeled_count", cycle.labeled_count},
                        {"test_accuracy", cycle.test_accuracy},
                        {"covering_radius", cycle.covering_radius},
                        {"mean_covering_distance", cycle.mean_covering_distance},
                        {"selected", cycle.selected}});
    }
    runs.push_back({{"strategy", std::string(to_string(run.strategy))},
                    {"seed", run.seed},
                    {"degenerate_draws", run.degenerate_draws},
                    {"cycles", cycles}});
  }
  object["runs"] = runs;

  json aggregates = json::array();
  for (const AggregateRecord& agg : report.aggregates) {
    aggregates.push_back({{"strategy", std::string(to_string(agg.strategy))},
                          {"cycle", agg.cycle},
                          {"labeled_count", agg.labeled_count},
                          {"mean_accuracy", agg.mean_accuracy},
                          {"stderr_accuracy", agg.stderr_accuracy},
                          {"mean_covering_radius", agg.mean_covering_radius},
                          {"stderr_covering_radius", agg.stderr_covering_radius}});
  }
  object["aggregates"] = aggregates;
  return object.dump(2) + "\n";
}

void write_report(const ALExperimentReport& report, const std::filesystem::path& path) {
  spit(path, report_to_json(report));
}

}  // namespace alsel
