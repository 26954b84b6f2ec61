#pragma once

#include <string>
#include <vector>

#include "samix/image.hpp"

namespace samix {

// PNG files in lexicographic filename order, uniform dimensions enforced.
std::vector<Image> load_images(const std::string& dir);

// Same, plus a filename,label CSV (an optional "filename,label" header line
// is skipped). Every file must be labeled and every label must match a file.
LabeledCorpus load_labeled_corpus(const std::string& dir, const std::string& labels_csv);

// Writes <index>.png (zero padded) and, when labels are given, labels.csv.
void save_corpus(const std::string& dir, const std::vector<Image>& images,
                 const std::vector<int>* labels = nullptr);

}  // namespace samix
