#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "iclap/types.hpp"

namespace iclap {

/// Parses one touch file:
///
///   # comment lines and blank lines are ignored
///   dims <rows> <cols>
///   x y z v_1 ... v_(rows*cols)      (pressures row-major)
///
/// A missing `dims` header means 14x6. Throws ParseError naming the offending
/// line; a file without data lines is rejected.
Exploration parse_exploration(std::string_view text, std::string object_id = {});

/// Canonical form: `dims` header plus one line per sample, shortest
/// round-trip decimals separated by single spaces.
std::string serialize_exploration(const Exploration& exploration);

struct DatasetObject {
  std::string object_id;
  std::string display_name;
  std::vector<std::string> exploration_ids;
  std::vector<Exploration> explorations;
};

/// `<root>/objects.txt` (object_id TAB display name) and
/// `<root>/<object_id>/<exploration_id>.touches`.
struct Dataset {
  std::vector<DatasetObject> objects;

  std::size_t index_of(std::string_view object_id) const;
};

/// Explorations are loaded in lexicographic file-name order.
Dataset load_dataset(const std::filesystem::path& root);
void save_dataset(const Dataset& dataset, const std::filesystem::path& root);

std::string read_text_file(const std::filesystem::path& path);

/// Writes to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace iclap
