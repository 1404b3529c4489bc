#include "evhmm/model_file.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace evhmm {

namespace {

constexpr std::string_view kHeader = "EVHMM 1";
// '[' is escaped too so that no record can be mistaken for a section header.
bool needs_escape(char c) {
  return c == '%' || c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '[';
}

std::string format_double(double v) {
  // %.17g round-trips every finite double exactly.
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= line.size()) {
    auto next = line.find(' ', pos);
    if (next == std::string::npos) next = line.size();
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return out;
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  // Reads the body of `section`; returns its records split into fields.
  std::vector<std::vector<std::string>> section(const std::string& name) {
    if (!have_line_) fetch();
    if (!have_line_) throw FormatError(name, lineno_ + 1, "missing section (file truncated)");
    if (line_ != "[" + name + "]") {
      throw FormatError(name, lineno_, "expected section header [" + name + "], found '" + line_ + "'");
    }
    std::vector<std::vector<std::string>> records;
    while (fetch()) {
      if (!line_.empty() && line_.front() == '[') break;
      records.push_back(split_fields(line_));
      record_lines_.push_back(lineno_);
    }
    return records;
  }

  std::size_t record_line(std::size_t index, std::size_t count) const {
    return record_lines_[record_lines_.size() - count + index];
  }

  bool at_end() {
    if (!have_line_) fetch();
    return !have_line_;
  }
  const std::string& line() const { return line_; }
  std::size_t lineno() const { return lineno_; }

  bool fetch() {
    have_line_ = static_cast<bool>(std::getline(in_, line_));
    if (have_line_) {
      ++lineno_;
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
    }
    return have_line_;
  }

 private:
  std::istream& in_;
  std::string line_;
  bool have_line_ = false;
  std::size_t lineno_ = 0;
  std::vector<std::size_t> record_lines_;
};

Count parse_count(const std::string& text, const std::string& section, std::size_t line) {
  Count v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty()) {
    throw FormatError(section, line, "invalid count '" + text + "'");
  }
  return v;
}

}  // namespace

std::string escape_label(std::string_view text) {
  static const char* hex = "0123456789ABCDEF";
  std::string out;
  for (char c : text) {
    if (needs_escape(c)) {
      auto u = static_cast<unsigned char>(c);
      out += '%';
      out += hex[u >> 4];
      out += hex[u & 0xF];
    } else {
      out += c;
    }
  }
  return out;
}

std::string unescape_label(std::string_view text) {
  std::string out;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '%') {
      if (i + 2 >= text.size()) throw std::invalid_argument("truncated percent escape");
      unsigned value = 0;
      auto [ptr, ec] = std::from_chars(text.data() + i + 1, text.data() + i + 3, value, 16);
      if (ec != std::errc() || ptr != text.data() + i + 3) {
        throw std::invalid_argument("invalid percent escape");
      }
      out += static_cast<char>(value);
      i += 2;
    } else {
      out += text[i];
    }
  }
  return out;
}

void write_model(std::ostream& out, const Model& model) {
  const CorpusCounts& c = model.counts;
  auto tag = [&](TagId t) { return escape_label(c.tags.at(t)); };

  out << kHeader << '\n';
  out << "[tags]\n";
  for (const auto& t : c.tags) out << escape_label(t) << '\n';
  out << "[vocab]\n";
  for (const auto& [w, n] : c.vocab) out << escape_label(w) << ' ' << n << '\n';
  out << "[initial]\n";
  for (const auto& [t, n] : c.initial_tags) out << tag(t) << ' ' << n << '\n';
  out << "[unigram]\n";
  for (const auto& [t, n] : c.tag_unigrams) out << tag(t) << ' ' << n << '\n';
  out << "[bigram]\n";
  for (const auto& [k, n] : c.tag_bigrams) out << tag(k[0]) << ' ' << tag(k[1]) << ' ' << n << '\n';
  out << "[trigram]\n";
  for (const auto& [k, n] : c.tag_trigrams) {
    out << tag(k[0]) << ' ' << tag(k[1]) << ' ' << tag(k[2]) << ' ' << n << '\n';
  }
  out << "[emission]\n";
  for (const auto& [k, n] : c.emissions) {
    out << tag(k.first) << ' ' << escape_label(k.second) << ' ' << n << '\n';
  }
  out << "[emission2]\n";
  for (const auto& [k, n] : c.emissions2) {
    out << tag(std::get<0>(k)) << ' ' << tag(std::get<1>(k)) << ' ' << escape_label(std::get<2>(k))
        << ' ' << n << '\n';
  }
  out << "[config]\n";
  out << "unk_threshold " << model.config.unk_threshold << '\n';
  out << "add_k " << format_double(model.config.add_k) << '\n';
  out << "lambda_mode " << to_string(model.config.lambda_mode) << '\n';
}

Model read_model(std::istream& in) {
  Reader reader(in);
  if (!reader.fetch()) throw VersionError("empty model file");
  if (reader.line() != kHeader) throw VersionError("unsupported model header '" + reader.line() + "'");
  reader.fetch();

  Model model;
  CorpusCounts& c = model.counts;

  auto expect_fields = [](const std::vector<std::string>& rec, std::size_t n,
                          const std::string& section, std::size_t line) {
    if (rec.size() != n) {
      throw FormatError(section, line,
                        "expected " + std::to_string(n) + " fields, found " + std::to_string(rec.size()));
    }
  };
  auto unescape = [](const std::string& s, const std::string& section, std::size_t line) {
    if (s.empty()) throw FormatError(section, line, "empty label");
    try {
      return unescape_label(s);
    } catch (const std::invalid_argument& e) {
      throw FormatError(section, line, e.what());
    }
  };

  {
    auto recs = reader.section("tags");
    for (std::size_t r = 0; r < recs.size(); ++r) {
      std::size_t line = reader.record_line(r, recs.size());
      expect_fields(recs[r], 1, "tags", line);
      c.tags.push_back(unescape(recs[r][0], "tags", line));
    }
    if (c.tags.empty()) throw FormatError("tags", reader.lineno(), "no tags");
    if (!std::is_sorted(c.tags.begin(), c.tags.end()) ||
        std::adjacent_find(c.tags.begin(), c.tags.end()) != c.tags.end()) {
      throw FormatError("tags", reader.lineno(), "tags must be sorted and unique");
    }
  }
  auto tag_id = [&](const std::string& field, const std::string& section, std::size_t line) {
    std::string label = unescape(field, section, line);
    auto it = std::lower_bound(c.tags.begin(), c.tags.end(), label);
    if (it == c.tags.end() || *it != label) throw FormatError(section, line, "unknown tag '" + label + "'");
    return static_cast<TagId>(it - c.tags.begin());
  };

  auto read_section = [&](const std::string& name, std::size_t fields, auto&& store) {
    auto recs = reader.section(name);
    for (std::size_t r = 0; r < recs.size(); ++r) {
      std::size_t line = reader.record_line(r, recs.size());
      expect_fields(recs[r], fields, name, line);
      store(recs[r], parse_count(recs[r].back(), name, line), line);
    }
  };

  read_section("vocab", 2, [&](const auto& rec, Count n, std::size_t line) {
    c.vocab[unescape(rec[0], "vocab", line)] = n;
  });
  read_section("initial", 2, [&](const auto& rec, Count n, std::size_t line) {
    c.initial_tags[tag_id(rec[0], "initial", line)] = n;
  });
  read_section("unigram", 2, [&](const auto& rec, Count n, std::size_t line) {
    c.tag_unigrams[tag_id(rec[0], "unigram", line)] = n;
    c.total_tokens += n;
  });
  read_section("bigram", 3, [&](const auto& rec, Count n, std::size_t line) {
    c.tag_bigrams[{tag_id(rec[0], "bigram", line), tag_id(rec[1], "bigram", line)}] = n;
  });
  read_section("trigram", 4, [&](const auto& rec, Count n, std::size_t line) {
    c.tag_trigrams[{tag_id(rec[0], "trigram", line), tag_id(rec[1], "trigram", line),
                    tag_id(rec[2], "trigram", line)}] = n;
  });
  read_section("emission", 3, [&](const auto& rec, Count n, std::size_t line) {
    c.emissions[{tag_id(rec[0], "emission", line), unescape(rec[1], "emission", line)}] = n;
  });
  read_section("emission2", 4, [&](const auto& rec, Count n, std::size_t line) {
    c.emissions2[{tag_id(rec[0], "emission2", line), tag_id(rec[1], "emission2", line),
                  unescape(rec[2], "emission2", line)}] = n;
  });

  auto recs = reader.section("config");
  bool seen[3] = {false, false, false};
  for (std::size_t r = 0; r < recs.size(); ++r) {
    std::size_t line = reader.record_line(r, recs.size());
    expect_fields(recs[r], 2, "config", line);
    const std::string& key = recs[r][0];
    const std::string& value = recs[r][1];
    if (key == "unk_threshold") {
      model.config.unk_threshold = parse_count(value, "config", line);
      seen[0] = true;
    } else if (key == "add_k") {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
      if (ec != std::errc() || ptr != value.data() + value.size() || v < 0.0) {
        throw FormatError("config", line, "invalid add_k '" + value + "'");
      }
      model.config.add_k = v;
      seen[1] = true;
    } else if (key == "lambda_mode") {
      try {
        model.config.lambda_mode = parse_lambda_mode(value);
      } catch (const std::invalid_argument& e) {
        throw FormatError("config", line, e.what());
      }
      seen[2] = true;
    } else {
      throw FormatError("config", line, "unknown key '" + key + "'");
    }
  }
  if (!(seen[0] && seen[1] && seen[2])) {
    throw FormatError("config", reader.lineno(), "missing configuration entries (file truncated)");
  }
  if (!reader.at_end()) {
    throw FormatError("config", reader.lineno(), "unexpected content after [config]");
  }
  return model;
}

void save_model(const Model& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  write_model(out, model);
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

Model load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return read_model(in);
}

}  // namespace evhmm
