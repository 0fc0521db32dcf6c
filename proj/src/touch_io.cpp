#include "iclap/touch_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "iclap/error.hpp"
#include "iclap/numfmt.hpp"

namespace iclap {
namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    fn(++line_no, text.substr(pos, end - pos));
    pos = end + 1;
  }
}

}  // namespace

Exploration parse_exploration(std::string_view text, std::string object_id) {
  int rows = kDefaultRows;
  int cols = kDefaultCols;
  bool seen_data = false;
  std::vector<TouchSample> samples;

  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    const auto tokens = split_ws(line);
    if (tokens.empty() || tokens.front().front() == '#') return;

    if (tokens.front() == "dims") {
      if (seen_data) throw ParseError(line_no, "dims header after data lines");
      long long r = 0, c = 0;
      if (tokens.size() != 3 || !parse_int(tokens[1], r) || !parse_int(tokens[2], c) || r <= 0 || c <= 0 ||
          r > 10000 || c > 10000) {
        throw ParseError(line_no, "expected 'dims <rows> <cols>' with positive integers");
      }
      rows = static_cast<int>(r);
      cols = static_cast<int>(c);
      return;
    }

    seen_data = true;
    const std::size_t cells = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (tokens.size() != 3 + cells) {
      throw ParseError(line_no, "expected " + std::to_string(3 + cells) + " fields (x y z + " +
                                    std::to_string(cells) + " pressures), got " + std::to_string(tokens.size()));
    }
    std::vector<double> values(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (!parse_double(tokens[i], values[i]) || !std::isfinite(values[i])) {
        throw ParseError(line_no, "non-numeric field '" + std::string(tokens[i]) + "'");
      }
    }
    for (std::size_t i = 3; i < values.size(); ++i) {
      if (values[i] < 0.0) throw ParseError(line_no, "negative pressure at field " + std::to_string(i + 1));
    }
    Position p{values[0], values[1], values[2]};
    samples.emplace_back(p, TactileFrame(rows, cols, std::vector<double>(values.begin() + 3, values.end())));
  });

  if (samples.empty()) throw ParseError(0, "touch file contains no samples");
  return Exploration(std::move(object_id), std::move(samples));
}

std::string serialize_exploration(const Exploration& exploration) {
  std::string out = "dims " + std::to_string(exploration.rows()) + " " + std::to_string(exploration.cols()) + "\n";
  for (const auto& s : exploration.samples()) {
    out += format_double(s.position[0]);
    out += ' ';
    out += format_double(s.position[1]);
    out += ' ';
    out += format_double(s.position[2]);
    for (double v : s.frame.pressures()) {
      out += ' ';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

std::size_t Dataset::index_of(std::string_view object_id) const {
  for (std::size_t i = 0; i < objects.size(); ++i) {
    if (objects[i].object_id == object_id) return i;
  }
  throw ArgumentError("unknown object '" + std::string(object_id) + "'");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Dataset load_dataset(const fs::path& root) {
  const fs::path index = root / "objects.txt";
  const std::string text = read_text_file(index);
  Dataset dataset;
  for_each_line(text, [&](std::size_t line_no, std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') return;
    const auto tab = line.find('\t');
    DatasetObject obj;
    obj.object_id = std::string(line.substr(0, tab));
    obj.display_name = tab == std::string_view::npos ? obj.object_id : std::string(line.substr(tab + 1));
    if (obj.object_id.empty()) throw ParseError(line_no, "objects.txt: empty object id");
    dataset.objects.push_back(std::move(obj));
  });

  for (auto& obj : dataset.objects) {
    const fs::path dir = root / obj.object_id;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && entry.path().extension() == ".touches") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      try {
        obj.explorations.push_back(parse_exploration(read_text_file(f), obj.object_id));
      } catch (const ParseError& e) {
        throw ParseError(e.line(), e.detail(), f.string());
      }
      obj.exploration_ids.push_back(f.stem().string());
    }
  }
  return dataset;
}

void save_dataset(const Dataset& dataset, const fs::path& root) {
  fs::create_directories(root);
  std::string index;
  for (const auto& obj : dataset.objects) {
    index += obj.object_id + "\t" + obj.display_name + "\n";
    for (std::size_t i = 0; i < obj.explorations.size(); ++i) {
      const std::string id = i < obj.exploration_ids.size() ? obj.exploration_ids[i] : "e" + std::to_string(i);
      write_file_atomic(root / obj.object_id / (id + ".touches"), serialize_exploration(obj.explorations[i]));
    }
  }
  write_file_atomic(root / "objects.txt", index);
}

}  // namespace iclap
