#include "samix/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "samix/png_io.hpp"

namespace fs = std::filesystem;

namespace samix {

namespace {

std::vector<std::string> list_pngs(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png")
      names.push_back(entry.path().filename().string());
  }
  if (names.empty()) throw DataError("no PNG images in " + dir);
  std::sort(names.begin(), names.end());
  return names;
}

std::vector<Image> load_named(const std::string& dir, const std::vector<std::string>& names) {
  std::vector<Image> images;
  images.reserve(names.size());
  for (const auto& name : names) {
    Image img = read_png((fs::path(dir) / name).string());
    if (!images.empty() && (img.height != images.front().height || img.width != images.front().width ||
                            img.channels != images.front().channels))
      throw DataError("mixed image dimensions at " + name);
    images.push_back(std::move(img));
  }
  return images;
}

}  // namespace

std::vector<Image> load_images(const std::string& dir) {
  return load_named(dir, list_pngs(dir));
}

LabeledCorpus load_labeled_corpus(const std::string& dir, const std::string& labels_csv) {
  auto names = list_pngs(dir);

  std::ifstream csv(labels_csv);
  if (!csv) throw DataError("cannot open labels CSV: " + labels_csv);
  std::map<std::string, int> labels;
  std::string line;
  bool first = true;
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    auto comma = line.find(',');
    if (comma == std::string::npos) throw DataError("malformed CSV line: '" + line + "'");
    std::string name = line.substr(0, comma);
    std::string value = line.substr(comma + 1);
    if (first && name == "filename") {
      first = false;
      continue;
    }
    first = false;
    try {
      labels[name] = std::stoi(value);
    } catch (const std::exception&) {
      throw DataError("bad label '" + value + "' for " + name);
    }
  }

  std::set<std::string> file_set(names.begin(), names.end());
  for (const auto& [name, label] : labels) {
    if (!file_set.count(name)) throw DataError("label for missing file: " + name);
    if (label < 0) throw DataError("negative label for " + name);
  }

  LabeledCorpus corpus;
  corpus.images = load_named(dir, names);
  for (const auto& name : names) {
    auto it = labels.find(name);
    if (it == labels.end()) throw DataError("missing label for " + name);
    corpus.labels.push_back(it->second);
    corpus.num_classes = std::max(corpus.num_classes, it->second + 1);
  }
  return corpus;
}

void save_corpus(const std::string& dir, const std::vector<Image>& images,
                 const std::vector<int>* labels) {
  if (labels && labels->size() != images.size())
    throw DataError("save_corpus: image/label count mismatch");
  fs::create_directories(dir);
  std::ofstream csv;
  if (labels) {
    csv.open((fs::path(dir) / "labels.csv").string());
    if (!csv) throw DataError("save_corpus: cannot write labels.csv");
    csv << "filename,label\n";
  }
  for (size_t k = 0; k < images.size(); ++k) {
    std::ostringstream name;
    name.width(5);
    name.fill('0');
    name << k;
    std::string file = name.str() + ".png";
    write_png((fs::path(dir) / file).string(), images[k]);
    if (labels) csv << file << ',' << (*labels)[k] << '\n';
  }
}

}  // namespace samix
