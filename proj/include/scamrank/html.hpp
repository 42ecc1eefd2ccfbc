#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace scamrank::html {

struct Tag {
  std::string name;  // lowercase, without '/' for end tags
  bool closing = false;
  std::map<std::string, std::string> attrs;  // lowercase keys, entity-undecoded values
  std::string inner_text;  // for <a> and <title>: text up to the matching end tag
};

struct Document {
  std::vector<Tag> tags;    // start and end tags in document order
  std::string visible_text;  // text outside <script>/<style>, whitespace-collapsed
};

// Forgiving tokenizer: never throws, tolerates unclosed tags and quotes,
// skips comments and doctype. Not a DOM builder.
Document parse(std::string_view html);

}  // namespace scamrank::html
