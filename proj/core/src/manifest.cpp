#include "scnn/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "scnn/netpbm.hpp"

namespace scnn::io {
namespace fs = std::filesystem;
namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

Manifest parse(const fs::path& file, const std::vector<std::string>* declared) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error(file.string() + ": cannot open manifest");
  Manifest m;
  if (declared) m.classes = *declared;
  const fs::path base = file.parent_path();
  std::set<fs::path> seen;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string where = file.string() + ":" + std::to_string(lineno) + ": ";
    if (trim(line).empty() || trim(line).front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || line.find('\t', tab + 1) != std::string::npos) {
      throw std::runtime_error(where + "expected 'path<TAB>label'");
    }
    ManifestRecord rec;
    const std::string rel = line.substr(0, tab);
    rec.label = trim(line.substr(tab + 1));
    if (rel.empty() || rec.label.empty()) throw std::runtime_error(where + "empty path or label");
    rec.path = fs::path(rel).is_absolute() ? fs::path(rel) : base / rel;
    rec.path = rec.path.lexically_normal();
    if (!seen.insert(rec.path).second) throw std::runtime_error(where + "duplicate path " + rel);

    auto it = std::find(m.classes.begin(), m.classes.end(), rec.label);
    if (it == m.classes.end()) {
      if (declared) throw std::runtime_error(where + "label '" + rec.label + "' is not a declared class");
      m.classes.push_back(rec.label);
      it = m.classes.end() - 1;
    }
    rec.class_index = static_cast<int>(it - m.classes.begin());
    m.records.push_back(std::move(rec));
  }
  if (m.records.empty()) throw std::runtime_error(file.string() + ": manifest has no records");
  return m;
}

}  // namespace

Manifest read_manifest(const fs::path& file, const std::vector<std::string>& classes) {
  return parse(file, &classes);
}

Manifest read_manifest(const fs::path& file) { return parse(file, nullptr); }

void write_manifest(const fs::path& file, const std::vector<ManifestRecord>& records) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error(file.string() + ": cannot write manifest");
  const fs::path base = file.parent_path().empty() ? fs::path(".") : file.parent_path();
  for (const ManifestRecord& r : records) {
    fs::path p = r.path.lexically_relative(base);
    if (p.empty() || *p.begin() == "..") p = r.path;
    out << p.generic_string() << '\t' << r.label << '\n';
  }
}

std::vector<std::string> parse_class_list(const std::string& csv) {
  std::vector<std::string> out;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw std::invalid_argument("empty class name in '" + csv + "'");
    if (std::find(out.begin(), out.end(), item) != out.end()) {
      throw std::invalid_argument("duplicate class name '" + item + "'");
    }
    out.push_back(item);
  }
  if (out.empty()) throw std::invalid_argument("class list is empty");
  return out;
}

std::vector<LabeledImage> load_dataset(const Manifest& manifest, const api::ApiOptions& options) {
  std::vector<LabeledImage> out;
  out.reserve(manifest.records.size());
  for (const ManifestRecord& r : manifest.records) {
    if (fs::is_directory(r.path)) {
      out.push_back({api::build_api(load_frames(r.path), options).pixels, r.class_index});
    } else {
      out.push_back({load_binary_pgm(r.path), r.class_index});
    }
  }
  return out;
}

}  // namespace scnn::io
