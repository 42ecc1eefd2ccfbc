#include "scamrank/html.hpp"

#include <cctype>

#include "scamrank/common.hpp"

namespace scamrank::html {

namespace {

bool name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

void append_text(std::string& dst, std::string_view text) {
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      if (!dst.empty() && dst.back() != ' ') dst += ' ';
    } else {
      dst += c;
    }
  }
}

}  // namespace

Document parse(std::string_view src) {
  Document doc;
  std::size_t i = 0;
  const std::size_t n = src.size();
  // Indices into doc.tags of open <a>/<title> tags collecting their text.
  std::vector<std::size_t> collecting;
  std::string raw_until;  // set inside <script>/<style>

  auto add_text = [&](std::string_view text) {
    append_text(doc.visible_text, text);
    for (auto idx : collecting) append_text(doc.tags[idx].inner_text, text);
  };

  while (i < n) {
    if (!raw_until.empty()) {
      auto lower = to_lower(src.substr(i));
      auto end = lower.find("</" + raw_until);
      if (end == std::string::npos) break;
      i += end;
      raw_until.clear();
      continue;
    }
    if (src[i] != '<') {
      auto next = src.find('<', i);
      if (next == std::string_view::npos) next = n;
      add_text(src.substr(i, next - i));
      i = next;
      continue;
    }
    if (src.compare(i, 4, "<!--") == 0) {
      auto end = src.find("-->", i + 4);
      i = end == std::string_view::npos ? n : end + 3;
      continue;
    }
    if (i + 1 < n && (src[i + 1] == '!' || src[i + 1] == '?')) {
      auto end = src.find('>', i);
      i = end == std::string_view::npos ? n : end + 1;
      continue;
    }
    std::size_t j = i + 1;
    Tag tag;
    if (j < n && src[j] == '/') {
      tag.closing = true;
      ++j;
    }
    std::size_t name_start = j;
    while (j < n && name_char(src[j])) ++j;
    if (j == name_start) {
      // A stray '<' is text.
      add_text(src.substr(i, 1));
      ++i;
      continue;
    }
    tag.name = to_lower(src.substr(name_start, j - name_start));
    // Attributes.
    while (j < n && src[j] != '>') {
      if (std::isspace(static_cast<unsigned char>(src[j])) || src[j] == '/') {
        ++j;
        continue;
      }
      std::size_t ks = j;
      while (j < n && !std::isspace(static_cast<unsigned char>(src[j])) && src[j] != '=' && src[j] != '>' &&
             src[j] != '/')
        ++j;
      std::string key = to_lower(src.substr(ks, j - ks));
      while (j < n && std::isspace(static_cast<unsigned char>(src[j]))) ++j;
      std::string value;
      if (j < n && src[j] == '=') {
        ++j;
        while (j < n && std::isspace(static_cast<unsigned char>(src[j]))) ++j;
        if (j < n && (src[j] == '"' || src[j] == '\'')) {
          char q = src[j++];
          std::size_t vs = j;
          while (j < n && src[j] != q) ++j;
          value = std::string(src.substr(vs, j - vs));
          if (j < n) ++j;
        } else {
          std::size_t vs = j;
          while (j < n && !std::isspace(static_cast<unsigned char>(src[j])) && src[j] != '>') ++j;
          value = std::string(src.substr(vs, j - vs));
        }
      }
      if (!key.empty() && !tag.attrs.contains(key)) tag.attrs.emplace(std::move(key), std::move(value));
    }
    i = j < n ? j + 1 : n;

    if (tag.closing) {
      for (auto it = collecting.rbegin(); it != collecting.rend(); ++it) {
        if (doc.tags[*it].name == tag.name) {
          collecting.erase(std::next(it).base());
          break;
        }
      }
      doc.tags.push_back(std::move(tag));
      continue;
    }
    std::string name = tag.name;
    doc.tags.push_back(std::move(tag));
    if (name == "a" || name == "title") collecting.push_back(doc.tags.size() - 1);
    if (name == "script" || name == "style") raw_until = name;
  }
  for (auto& t : doc.tags) t.inner_text = trim(t.inner_text);
  doc.visible_text = trim(doc.visible_text);
  return doc;
}

}  // namespace scamrank::html
