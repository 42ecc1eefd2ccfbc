#include "scamrank/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <tuple>

#include "scamrank/public_suffix.hpp"

namespace scamrank {

using nlohmann::json;

Date parse_date(std::string_view s) {
  int y = 0, m = 0, d = 0;
  std::string buf(s.substr(0, std::min<std::size_t>(s.size(), 10)));
  if (std::sscanf(buf.c_str(), "%4d-%2d-%2d", &y, &m, &d) != 3) throw Error("bad date: " + std::string(s));
  std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                  std::chrono::day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) throw Error("bad date: " + std::string(s));
  return Date{ymd};
}

std::string format_date(Date d) {
  std::chrono::year_month_day ymd{d};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

Timestamp parse_timestamp(std::string_view s) {
  Date day = parse_date(s);
  int hh = 0, mm = 0, ss = 0;
  if (s.size() > 10) {
    std::string rest(s.substr(10));
    if (std::sscanf(rest.c_str(), "T%2d:%2d:%2d", &hh, &mm, &ss) != 3)
      throw Error("bad timestamp: " + std::string(s));
  }
  return std::chrono::time_point_cast<std::chrono::seconds>(day) + std::chrono::hours{hh} +
         std::chrono::minutes{mm} + std::chrono::seconds{ss};
}

std::string format_timestamp(Timestamp t) {
  auto day = std::chrono::floor<std::chrono::days>(t);
  auto secs = (t - day).count();
  char buf[32];
  std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", format_date(day).c_str(),
                static_cast<long long>(secs / 3600), static_cast<long long>(secs / 60 % 60),
                static_cast<long long>(secs % 60));
  return buf;
}

std::string_view to_string(Engine e) {
  switch (e) {
    case Engine::Google: return "google";
    case Engine::Bing: return "bing";
    case Engine::Baidu: return "baidu";
    case Engine::Naver: return "naver";
  }
  return "?";
}

std::string_view to_string(Competition c) {
  switch (c) {
    case Competition::Low: return "LOW";
    case Competition::Medium: return "MEDIUM";
    case Competition::High: return "HIGH";
  }
  return "?";
}

std::string_view to_string(Label l) { return l == Label::Scam ? "scam" : "benign"; }

std::string_view to_string(PageState s) {
  switch (s) {
    case PageState::Live: return "live";
    case PageState::Parked: return "parked";
    case PageState::Unreachable: return "unreachable";
  }
  return "?";
}

Engine parse_engine(std::string_view s) {
  auto l = to_lower(s);
  if (l == "google") return Engine::Google;
  if (l == "bing") return Engine::Bing;
  if (l == "baidu") return Engine::Baidu;
  if (l == "naver") return Engine::Naver;
  throw UnknownEngine(std::string(s));
}

Competition parse_competition(std::string_view s) {
  auto l = to_lower(s);
  if (l == "low") return Competition::Low;
  if (l == "medium") return Competition::Medium;
  if (l == "high") return Competition::High;
  throw SchemaError("unknown competition level: " + std::string(s));
}

Label parse_label(std::string_view s) {
  auto l = to_lower(trim(s));
  if (l == "scam" || l == "1") return Label::Scam;
  if (l == "benign" || l == "0") return Label::Benign;
  throw SchemaError("unknown label: " + std::string(s));
}

namespace {

json parse_object(std::string_view line, std::size_t line_no) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(), line_no);
  }
  if (!j.is_object()) throw ParseError("expected a JSON object", line_no);
  return j;
}

template <typename T>
std::optional<T> opt(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<T>();
}

std::optional<Date> opt_date(const json& j, const char* key) {
  auto s = opt<std::string>(j, key);
  if (!s) return std::nullopt;
  return parse_date(*s);
}

template <typename T>
json or_null(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

template <typename F>
std::vector<std::invoke_result_t<F, std::string_view, std::size_t>> read_jsonl(
    const std::filesystem::path& path, F&& parse_line) {
  std::vector<std::invoke_result_t<F, std::string_view, std::size_t>> out;
  std::istringstream in(read_file(path));
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    out.push_back(parse_line(line, no));
  }
  return out;
}

}  // namespace

DomainSnapshot parse_snapshot(std::string_view json_line, std::size_t line_no) {
  json j = parse_object(json_line, line_no);
  try {
    DomainSnapshot s;
    auto url = opt<std::string>(j, "url");
    if (!url || url->empty()) throw SchemaError("line " + std::to_string(line_no) + ": missing url");
    s.url = *url;
    if (auto ts = opt<std::string>(j, "fetched_at")) s.fetched_at = parse_timestamp(*ts);
    s.http_status = opt<int>(j, "http_status").value_or(200);
    if (s.http_status != 0 && (s.http_status < 100 || s.http_status > 599))
      throw SchemaError("line " + std::to_string(line_no) + ": http_status out of range");
    s.final_url = opt<std::string>(j, "final_url").value_or("");
    if (s.final_url.empty() && s.http_status >= 200) s.final_url = s.url;
    s.html = opt<std::string>(j, "html").value_or("");
    if (auto it = j.find("dns"); it != j.end() && it->is_object()) {
      for (auto& [type, recs] : it->items()) {
        std::string upper = type;
        std::transform(upper.begin(), upper.end(), upper.begin(), ::toupper);
        auto& dst = s.dns[upper];
        if (recs.is_array())
          for (auto& r : recs) dst.push_back(r.get<std::string>());
        else if (recs.is_string())
          dst.push_back(recs.get<std::string>());
      }
    }
    if (auto it = j.find("whois"); it != j.end() && it->is_object()) {
      const json& w = *it;
      s.whois.created = opt_date(w, "created");
      s.whois.expires = opt_date(w, "expires");
      s.whois.registrar = opt<std::string>(w, "registrar");
      s.whois.registrar_country = opt<std::string>(w, "registrar_country");
      s.whois.registrant_country = opt<std::string>(w, "registrant_country");
      s.whois.privacy = opt<bool>(w, "privacy");
      s.whois.registrant_email_domain = opt<std::string>(w, "registrant_email_domain");
    }
    if (auto it = j.find("ranks"); it != j.end() && it->is_object()) {
      const json& r = *it;
      s.ranks.tranco = opt<std::int64_t>(r, "tranco");
      s.ranks.majestic = opt<std::int64_t>(r, "majestic");
      s.ranks.majestic_refips = opt<std::int64_t>(r, "majestic_refips");
      s.ranks.majestic_refsubnets = opt<std::int64_t>(r, "majestic_refsubnets");
      s.ranks.majestic_tldrank = opt<std::int64_t>(r, "majestic_tldrank");
      s.ranks.cisco = opt<std::int64_t>(r, "cisco");
    }
    return s;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field type: ") + e.what(), line_no);
  }
}

json snapshot_to_json(const DomainSnapshot& s) {
  json dns = json::object();
  for (auto& [type, recs] : s.dns) dns[type] = recs;
  auto date_or_null = [](const std::optional<Date>& d) { return d ? json(format_date(*d)) : json(nullptr); };
  return json{
      {"url", s.url},
      {"fetched_at", s.fetched_at ? json(format_timestamp(*s.fetched_at)) : json(nullptr)},
      {"http_status", s.http_status},
      {"final_url", s.final_url},
      {"html", s.html},
      {"dns", dns},
      {"whois",
       {{"created", date_or_null(s.whois.created)},
        {"expires", date_or_null(s.whois.expires)},
        {"registrar", or_null(s.whois.registrar)},
        {"registrar_country", or_null(s.whois.registrar_country)},
        {"registrant_country", or_null(s.whois.registrant_country)},
        {"privacy", or_null(s.whois.privacy)},
        {"registrant_email_domain", or_null(s.whois.registrant_email_domain)}}},
      {"ranks",
       {{"tranco", or_null(s.ranks.tranco)},
        {"majestic", or_null(s.ranks.majestic)},
        {"majestic_refips", or_null(s.ranks.majestic_refips)},
        {"majestic_refsubnets", or_null(s.ranks.majestic_refsubnets)},
        {"majestic_tldrank", or_null(s.ranks.majestic_tldrank)},
        {"cisco", or_null(s.ranks.cisco)}}},
  };
}

std::vector<DomainSnapshot> read_snapshots(const std::filesystem::path& path) {
  return read_jsonl(path, [](std::string_view l, std::size_t n) { return parse_snapshot(l, n); });
}

void write_snapshots(const std::filesystem::path& path, const std::vector<DomainSnapshot>& snaps) {
  std::string out;
  for (auto& s : snaps) out += snapshot_to_json(s).dump() + "\n";
  write_file(path, out);
}

KeywordSuggestion parse_keyword(std::string_view json_line, std::size_t line_no) {
  json j = parse_object(json_line, line_no);
  try {
    KeywordSuggestion k;
    k.text = to_lower(trim(opt<std::string>(j, "text").value_or("")));
    if (k.text.empty()) throw SchemaError("line " + std::to_string(line_no) + ": empty keyword text");
    k.source_domain = opt<std::string>(j, "source_domain").value_or("");
    k.category = opt<std::string>(j, "category").value_or("");
    k.competition = parse_competition(opt<std::string>(j, "competition").value_or("HIGH"));
    k.monthly_volume = opt<std::int64_t>(j, "monthly_volume");
    return k;
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad field type: ") + e.what(), line_no);
  }
}

json keyword_to_json(const KeywordSuggestion& k) {
  return json{{"text", k.text},
              {"source_domain", k.source_domain},
              {"category", k.category},
              {"competition", to_string(k.competition)},
              {"monthly_volume", or_null(k.monthly_volume)}};
}

std::vector<KeywordSuggestion> read_keywords(const std::filesystem::path& path) {
  return read_jsonl(path, [](std::string_view l, std::size_t n) { return parse_keyword(l, n); });
}

void write_keywords(const std::filesystem::path& path, const std::vector<KeywordSuggestion>& kws) {
  std::string out;
  for (auto& k : kws) out += keyword_to_json(k).dump() + "\n";
  write_file(path, out);
}

void SerpResultSet::normalize() {
  std::stable_sort(entries.begin(), entries.end(), [](const SerpEntry& a, const SerpEntry& b) {
    return std::tie(a.engine, a.rank) < std::tie(b.engine, b.rank);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (entries[i].engine == entries[i - 1].engine && entries[i].rank == entries[i - 1].rank)
      throw SchemaError("duplicate rank " + std::to_string(entries[i].rank) + " for query '" + query + "'");
  }
}

SerpResultSet serp_from_json(const json& j) {
  SerpResultSet s;
  s.query = j.at("query").get<std::string>();
  for (auto& e : j.at("entries")) {
    SerpEntry en;
    en.engine = parse_engine(e.at("engine").get<std::string>());
    en.rank = e.at("rank").get<int>();
    if (en.rank < 1) throw SchemaError("rank must be >= 1");
    en.url = e.at("url").get<std::string>();
    en.root_domain = opt<std::string>(e, "root_domain").value_or("");
    en.title = opt<std::string>(e, "title").value_or("");
    en.description = opt<std::string>(e, "description").value_or("");
    s.entries.push_back(std::move(en));
  }
  s.normalize();
  return s;
}

json serp_to_json(const SerpResultSet& s) {
  json entries = json::array();
  for (auto& e : s.entries) {
    entries.push_back({{"engine", to_string(e.engine)},
                       {"rank", e.rank},
                       {"url", e.url},
                       {"root_domain", e.root_domain},
                       {"title", e.title},
                       {"description", e.description}});
  }
  return json{{"query", s.query}, {"entries", entries}};
}

std::vector<SerpResultSet> read_serps(const std::filesystem::path& path) {
  return read_jsonl(path, [](std::string_view l, std::size_t n) {
    json j = parse_object(l, n);
    try {
      return serp_from_json(j);
    } catch (const json::exception& e) {
      throw ParseError(std::string("bad SERP record: ") + e.what(), n);
    }
  });
}

void write_serps(const std::filesystem::path& path, const std::vector<SerpResultSet>& serps) {
  std::string out;
  for (auto& s : serps) out += serp_to_json(s).dump() + "\n";
  write_file(path, out);
}

void fill_root_domains(SerpResultSet& serp, const PublicSuffixList& psl) {
  for (auto& e : serp.entries)
    if (e.root_domain.empty()) e.root_domain = psl.root_domain(e.url);
}

std::vector<LabeledDomain> parse_labels(std::string_view csv) {
  std::vector<LabeledDomain> out;
  std::set<std::string> seen;
  std::istringstream in{std::string(csv)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (trim(line).empty()) continue;
    auto f = parse_csv_line(line);
    if (no == 1 && !f.empty() && trim(f[0]) == "root_domain") continue;
    if (f.size() < 2) throw ParseError("expected root_domain,label,category", no);
    LabeledDomain d;
    d.root_domain = to_lower(trim(f[0]));
    try {
      d.label = parse_label(f[1]);
    } catch (const SchemaError& e) {
      throw ParseError(e.what(), no);
    }
    d.category = f.size() > 2 ? trim(f[2]) : "";
    if (!seen.insert(d.root_domain).second) throw ParseError("duplicate root domain " + d.root_domain, no);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<LabeledDomain> read_labels(const std::filesystem::path& path) { return parse_labels(read_file(path)); }

void write_labels(const std::filesystem::path& path, const std::vector<LabeledDomain>& labels) {
  std::string out = "root_domain,label,category\n";
  for (auto& l : labels)
    out += csv_escape(l.root_domain) + "," + std::string(to_string(l.label)) + "," + csv_escape(l.category) + "\n";
  write_file(path, out);
}

ParkedDetector::ParkedDetector(const std::vector<std::string>& patterns) {
  for (auto& p : patterns) {
    try {
      patterns_.emplace_back(p, std::regex::ECMAScript | std::regex::icase | std::regex::optimize);
    } catch (const std::regex_error& e) {
      throw Error("bad parked pattern '" + p + "': " + e.what());
    }
  }
}

ParkedDetector ParkedDetector::from_file(const std::filesystem::path& path) {
  return ParkedDetector(read_lines(path));
}

ParkedDetector ParkedDetector::bundled() { return from_file(data_dir() / "parked_patterns.txt"); }

PageState ParkedDetector::check(const DomainSnapshot& snap) const {
  if (snap.non_resolving()) return PageState::Unreachable;
  for (auto& re : patterns_)
    if (std::regex_search(snap.html, re)) return PageState::Parked;
  return PageState::Live;
}

bool ParkedDetector::admits(const DomainSnapshot& snap) const {
  return snap.http_status >= 200 && check(snap) == PageState::Live;
}

}  // namespace scamrank
