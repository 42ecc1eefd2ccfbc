// Eigen must precede httplib: <resolv.h> defines a `_res` macro.
#include "scamrank/discovery.hpp"

#include <cstdlib>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

namespace scamrank {

namespace {

using nlohmann::json;

std::string require_env(const char* name) {
  const char* v = std::getenv(name);
  if (!v || !*v) throw Error(std::string("LIVE mode needs ") + name + " in the environment");
  return v;
}

class DataForSeoTransport : public SerpTransport {
 public:
  DataForSeoTransport(std::string login, std::string password)
      : login_(std::move(login)), password_(std::move(password)) {}

  SerpResultSet fetch(const std::string& query, Engine engine, int depth) override {
    httplib::SSLClient client("api.dataforseo.com", 443);
    client.set_basic_auth(login_, password_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    json body = json::array({json{{"keyword", query}, {"language_code", "en"}, {"location_code", 2840},
                                  {"depth", depth}}});
    auto path = "/v3/serp/" + std::string(to_string(engine)) + "/organic/live/regular";
    auto res = client.Post(path, body.dump(), "application/json");
    if (!res) throw TransportError("request failed: " + httplib::to_string(res.error()), 0);
    if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status), res->status);

    SerpResultSet out;
    out.query = query;
    try {
      auto j = json::parse(res->body);
      auto& task = j.at("tasks").at(0);
      if (task.value("status_code", 0) != 20000)
        throw TransportError("task error: " + task.value("status_message", std::string("?")), 200);
      for (auto& result : task.at("result")) {
        if (!result.contains("items") || result["items"].is_null()) continue;
        for (auto& item : result["items"]) {
          if (item.value("type", "") != "organic") continue;
          SerpEntry e;
          e.engine = engine;
          e.rank = item.at("rank_group").get<int>();
          e.url = item.value("url", "");
          e.title = item.value("title", "");
          if (item.contains("description") && item["description"].is_string())
            e.description = item["description"].get<std::string>();
          out.entries.push_back(std::move(e));
        }
      }
    } catch (const json::exception& e) {
      throw TransportError(std::string("unexpected response: ") + e.what(), res->status);
    }
    return out;
  }

 private:
  std::string login_, password_;
};

}  // namespace

std::unique_ptr<SerpTransport> make_dataforseo_transport() {
  return std::make_unique<DataForSeoTransport>(require_env("DATAFORSEO_LOGIN"), require_env("DATAFORSEO_PASSWORD"));
}

}  // namespace scamrank
