#include "lightwaves/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>

#include "json.hpp"

#include "lightwaves/bytes.hpp"
#include "lightwaves/error.hpp"

namespace lightwaves {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string_view> words(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    const std::size_t start = i;
    while (i < s.size() && !std::isspace(static_cast<unsigned char>(s[i]))) ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

bool parse_bool(std::string_view s, std::size_t line) {
  const auto v = lower(s);
  if (v == "true") return true;
  if (v == "false") return false;
  throw ParseError(line, "malformed header: expected true/false, got '" + std::string(s) + "'");
}

std::size_t parse_count(std::string_view s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(line, "malformed header: expected integer, got '" + std::string(s) + "'");
  }
  return v;
}

double parse_value(std::string_view token, std::size_t line) {
  token = trim(token);
  if (token == "?") throw ParseError(line, "missing values unsupported");
  double v = 0.0;
  const char* begin = token.data();
  if (!token.empty() && token.front() == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, token.data() + token.size(), v);
  if (token.empty() || ec != std::errc() || ptr != token.data() + token.size()) {
    throw ParseError(line, "non-numeric value '" + std::string(token) + "'");
  }
  return v;
}

}  // namespace

TimeSeriesDataset parse_ts(std::istream& in, std::string name) {
  TimeSeriesDataset data;
  data.name = std::move(name);
  std::optional<std::size_t> dims;
  std::optional<std::size_t> length;
  bool has_labels = false;
  bool in_data = false;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;

    if (!in_data) {
      if (text.front() != '@') throw ParseError(line_no, "malformed header: data before @data");
      const auto parts = words(text);
      const auto tag = lower(parts.front());
      auto value = [&]() -> std::string_view {
        if (parts.size() != 2) throw ParseError(line_no, "malformed header: " + tag + " expects one value");
        return parts[1];
      };
      if (tag == "@problemname") {
        if (parts.size() < 2) throw ParseError(line_no, "malformed header: @problemName without value");
        if (data.name.empty()) data.name = std::string(parts[1]);
      } else if (tag == "@timestamps") {
        if (parse_bool(value(), line_no)) throw ParseError(line_no, "timestamped series unsupported");
      } else if (tag == "@missing") {
        parse_bool(value(), line_no);
      } else if (tag == "@univariate") {
        if (parse_bool(value(), line_no)) {
          if (dims && *dims != 1) throw ParseError(line_no, "malformed header: univariate with dimensions > 1");
          dims = 1;
        }
      } else if (tag == "@dimensions") {
        const auto d = parse_count(value(), line_no);
        if (d == 0) throw ParseError(line_no, "malformed header: zero dimensions");
        if (dims && *dims != d) throw ParseError(line_no, "malformed header: conflicting dimensions");
        dims = d;
      } else if (tag == "@equallength") {
        if (!parse_bool(value(), line_no)) throw ParseError(line_no, "variable-length unsupported");
      } else if (tag == "@serieslength") {
        length = parse_count(value(), line_no);
      } else if (tag == "@classlabel") {
        if (parts.size() < 2) throw ParseError(line_no, "malformed header: @classLabel without value");
        has_labels = parse_bool(parts[1], line_no);
        if (has_labels && parts.size() < 3) {
          throw ParseError(line_no, "malformed header: @classLabel true without labels");
        }
        if (!has_labels && parts.size() > 2) {
          throw ParseError(line_no, "malformed header: labels listed with @classLabel false");
        }
        for (std::size_t i = 2; i < parts.size(); ++i) {
          const std::string label(parts[i]);
          if (std::find(data.class_names.begin(), data.class_names.end(), label) != data.class_names.end()) {
            throw ParseError(line_no, "malformed header: duplicate class label '" + label + "'");
          }
          data.class_names.push_back(label);
        }
      } else if (tag == "@targetlabel") {
        throw ParseError(line_no, "regression targets unsupported");
      } else if (tag == "@data") {
        if (parts.size() != 1) throw ParseError(line_no, "malformed header: @data takes no value");
        in_data = true;
      } else {
        throw ParseError(line_no, "malformed header: unknown tag " + std::string(parts.front()));
      }
      continue;
    }

    auto fields = split(text, ':');
    if (has_labels) {
      const std::string label(trim(fields.back()));
      fields.pop_back();
      const auto it = std::find(data.class_names.begin(), data.class_names.end(), label);
      if (it == data.class_names.end()) throw ParseError(line_no, "unknown class label '" + label + "'");
      data.labels.push_back(static_cast<std::uint32_t>(it - data.class_names.begin()));
    }
    if (!dims) dims = fields.size();
    if (fields.size() != *dims) {
      throw ParseError(line_no, "channel count mismatch: expected " + std::to_string(*dims) + ", got " +
                                    std::to_string(fields.size()));
    }
    for (const auto field : fields) {
      const auto tokens = split(field, ',');
      if (!length) length = tokens.size();
      if (tokens.size() != *length) {
        throw ParseError(line_no, "unequal series lengths: expected " + std::to_string(*length) +
                                      ", got " + std::to_string(tokens.size()) +
                                      " (variable-length unsupported)");
      }
      for (const auto tok : tokens) data.values.push_back(parse_value(tok, line_no));
    }
    ++data.n;
  }

  if (!in_data) throw ParseError(line_no, "malformed header: missing @data");
  if (data.n == 0) throw ParseError(line_no, "no data records");
  data.channels = *dims;
  data.length = *length;
  if (data.length < 2) throw ParseError(line_no, "series length must be at least 2");
  data.validate();
  return data;
}

TimeSeriesDataset parse_ts_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  auto data = parse_ts(in);
  if (data.name.empty()) data.name = path.stem().string();
  return data;
}

std::vector<std::uint8_t> write_binary_dataset(const TimeSeriesDataset& data) {
  data.validate();
  ByteWriter w;
  w.raw("LWDS");
  w.u8(kBinaryVersion);
  w.u64(data.n);
  w.u64(data.channels);
  w.u64(data.length);
  w.u64(data.class_names.size());
  for (const auto& c : data.class_names) w.str(c);
  for (std::size_t i = 0; i < data.n; ++i) w.u32(data.labeled() ? data.labels[i] : kUnlabeled);
  for (double v : data.values) w.f64(v);
  return std::move(w).take();
}

namespace {

struct BinaryHeader {
  std::uint64_t n = 0, channels = 0, length = 0;
  std::vector<std::string> class_names;
  std::vector<std::uint32_t> labels;
  std::size_t values_offset = 0;
};

// Reads everything before the value block.
BinaryHeader read_header(ByteReader<DataError>& r) {
  if (r.remaining() < 4 || r.raw(4) != "LWDS") throw DataError("bad magic");
  const auto version = r.u8();
  if (version != kBinaryVersion) throw DataError("unsupported version " + std::to_string(version));
  BinaryHeader h;
  h.n = r.u64();
  h.channels = r.u64();
  h.length = r.u64();
  const auto k = r.u64();
  if (k > r.remaining() / 4) throw DataError("truncated payload");
  for (std::uint64_t i = 0; i < k; ++i) h.class_names.push_back(r.str());
  if (h.n > r.remaining() / 4) throw DataError("truncated payload");
  h.labels.resize(h.n);
  for (auto& l : h.labels) {
    l = r.u32();
    if (k == 0 ? l != kUnlabeled : l >= k) throw DataError("label index out of range");
  }
  if (k == 0) h.labels.clear();
  h.values_offset = r.position();
  return h;
}

}  // namespace

TimeSeriesDataset read_binary_dataset(std::span<const std::uint8_t> bytes, std::string name) {
  ByteReader<DataError> r(bytes);
  auto h = read_header(r);
  if (h.channels != 0 && h.length != 0 && h.n > r.remaining() / 8 / h.channels / h.length) {
    throw DataError("truncated payload");
  }
  const std::size_t count = h.n * h.channels * h.length;
  if (r.remaining() != count * 8) {
    throw DataError(r.remaining() < count * 8 ? "truncated payload" : "trailing bytes after payload");
  }
  TimeSeriesDataset data;
  data.name = std::move(name);
  data.n = h.n;
  data.channels = h.channels;
  data.length = h.length;
  data.class_names = std::move(h.class_names);
  data.labels = std::move(h.labels);
  data.values.resize(count);
  for (auto& v : data.values) v = r.f64();
  data.validate();
  return data;
}

void write_binary_dataset_file(const TimeSeriesDataset& data, const std::filesystem::path& path) {
  const auto bytes = write_binary_dataset(data);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("write failed for " + path.string());
}

namespace {

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

bool has_binary_magic(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  return in.gcount() == 4 && std::string_view(magic, 4) == "LWDS";
}

}  // namespace

TimeSeriesDataset load_dataset(const std::filesystem::path& path) {
  if (has_binary_magic(path)) return read_binary_dataset(read_all(path), path.stem().string());
  return parse_ts_file(path);
}

TimeSeriesDataset load_dataset_slice(const std::filesystem::path& path,
                                     std::span<const std::size_t> rows, std::size_t channel_begin,
                                     std::size_t channel_end) {
  if (!has_binary_magic(path)) return parse_ts_file(path).slice(rows, channel_begin, channel_end);

  std::ifstream in(path, std::ios::binary);
  const auto file_size = std::filesystem::file_size(path);
  // The header is small relative to the value block; read a bounded prefix
  // and grow it if class names are unusually long.
  std::size_t prefix = 1 << 16;
  std::vector<std::uint8_t> head;
  BinaryHeader h;
  while (true) {
    head.assign(std::min<std::uintmax_t>(prefix, file_size), 0);
    in.clear();
    in.seekg(0);
    in.read(reinterpret_cast<char*>(head.data()), static_cast<std::streamsize>(head.size()));
    try {
      ByteReader<DataError> r(head);
      h = read_header(r);
      break;
    } catch (const DataError& e) {
      if (std::string_view(e.what()) != "truncated payload" || head.size() == file_size) throw;
      prefix *= 4;
    }
  }
  if (channel_begin > channel_end || channel_end > h.channels) throw DataError("channel range out of bounds");
  if (h.values_offset + h.n * h.channels * h.length * 8 != file_size) {
    throw DataError(file_size < h.values_offset + h.n * h.channels * h.length * 8 ? "truncated payload"
                                                                                   : "trailing bytes after payload");
  }

  TimeSeriesDataset out;
  out.name = path.stem().string();
  out.n = rows.size();
  out.channels = channel_end - channel_begin;
  out.length = h.length;
  out.class_names = h.class_names;
  out.values.resize(out.n * out.channels * out.length);
  const std::size_t span_values = out.channels * h.length;
  std::vector<std::uint8_t> buf(span_values * 8);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= h.n) throw DataError("row index out of range");
    const std::size_t offset = h.values_offset + ((rows[i] * h.channels + channel_begin) * h.length) * 8;
    in.seekg(static_cast<std::streamoff>(offset));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!in) throw DataError("truncated payload");
    ByteReader<DataError> r(buf);
    for (std::size_t j = 0; j < span_values; ++j) out.values[i * span_values + j] = r.f64();
    if (!h.labels.empty()) out.labels.push_back(h.labels[rows[i]]);
  }
  return out;
}

// --- model document ---------------------------------------------------------

namespace {

using json = nlohmann::ordered_json;

json descriptor_to_json(const FeatureDescriptor& d) {
  return json{{"channel", d.channel},
              {"kernel", d.kernel},
              {"dilation_exp", d.dilation_exp},
              {"level", d.level},
              {"stat", to_string(d.stat)}};
}

FeatureDescriptor descriptor_from_json(const json& j) {
  FeatureDescriptor d;
  d.channel = j.at("channel").get<std::uint32_t>();
  const auto kernel = j.at("kernel").get<unsigned>();
  const auto dil = j.at("dilation_exp").get<unsigned>();
  const auto level = j.at("level").get<unsigned>();
  if (kernel >= kKernelCount || dil >= kDilationCount || (level != 1 && level != 2)) {
    throw DataError("invalid descriptor in model");
  }
  d.kernel = static_cast<std::uint8_t>(kernel);
  d.dilation_exp = static_cast<std::uint8_t>(dil);
  d.level = static_cast<std::uint8_t>(level);
  const auto stat = parse_stat(j.at("stat").get<std::string>());
  if (!stat) throw DataError("invalid stat in model");
  d.stat = *stat;
  return d;
}

}  // namespace

std::string model_to_json(const ModelArtifact& model) {
  model.validate();
  json doc;
  doc["format_version"] = model.format_version;
  doc["variant"] = to_string(model.variant);
  doc["input_channels"] = model.input_channels;
  doc["series_length"] = model.series_length;
  doc["normalize"] = model.normalize;
  doc["standardized"] = true;
  doc["alpha"] = model.alpha;
  doc["class_names"] = model.class_names;
  doc["channels_used"] = model.channels_used;
  json descriptors = json::array();
  for (const auto& d : model.descriptors) descriptors.push_back(descriptor_to_json(d));
  doc["descriptors"] = std::move(descriptors);
  doc["feature_means"] = model.feature_means;
  doc["feature_stds"] = model.feature_stds;
  json weights = json::array();
  for (Eigen::Index i = 0; i < model.weights.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < model.weights.cols(); ++k) row.push_back(model.weights(i, k));
    weights.push_back(std::move(row));
  }
  doc["weights"] = std::move(weights);
  json meta = json::object();
  for (const auto& [k, v] : model.metadata) meta[k] = v;
  doc["metadata"] = std::move(meta);
  return doc.dump(1) + "\n";
}

ModelArtifact model_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("model is not valid JSON: ") + e.what());
  }
  try {
    ModelArtifact m;
    m.format_version = doc.at("format_version").get<int>();
    if (m.format_version != kModelFormatVersion) {
      throw DataError("unsupported version " + std::to_string(m.format_version));
    }
    const auto variant = parse_variant(doc.at("variant").get<std::string>());
    if (!variant) throw DataError("unknown variant in model");
    m.variant = *variant;
    m.input_channels = doc.at("input_channels").get<std::size_t>();
    m.series_length = doc.at("series_length").get<std::size_t>();
    m.normalize = doc.at("normalize").get<bool>();
    m.alpha = doc.at("alpha").get<double>();
    m.class_names = doc.at("class_names").get<std::vector<std::string>>();
    m.channels_used = doc.at("channels_used").get<std::vector<std::uint32_t>>();
    for (const auto& d : doc.at("descriptors")) m.descriptors.push_back(descriptor_from_json(d));
    m.feature_means = doc.at("feature_means").get<std::vector<double>>();
    m.feature_stds = doc.at("feature_stds").get<std::vector<double>>();
    const auto& w = doc.at("weights");
    const auto rows = static_cast<Eigen::Index>(w.size());
    const auto cols = static_cast<Eigen::Index>(m.class_names.size());
    m.weights.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      const auto& row = w.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != cols) throw DataError("shape mismatch: weight row width");
      for (Eigen::Index k = 0; k < cols; ++k) m.weights(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    for (const auto& [k, v] : doc.at("metadata").items()) m.metadata[k] = v.get<std::string>();
    m.validate();
    return m;
  } catch (const json::exception& e) {
    throw DataError(std::string("malformed model document: ") + e.what());
  }
}

void save_model(const ModelArtifact& model, const std::filesystem::path& path) {
  const auto text = model_to_json(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  out << text;
  if (!out) throw DataError("write failed for " + path.string());
}

ModelArtifact load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open model " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return model_from_json(ss.str());
}

}  // namespace lightwaves
