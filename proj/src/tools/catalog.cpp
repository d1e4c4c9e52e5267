// SPDX-License-Identifier: Apache-2.0
#include "agentkit/tools/catalog.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <regex>
#include <set>

#include "agentkit/common/text.hpp"
#include "agentkit/tools/math_eval.hpp"

namespace agentkit::tools {
namespace {

struct Param {
  std::string name;
  Json schema;
  bool required = true;
};

Json object_schema(const std::vector<Param>& params) {
  Json props = Json::object();
  Json required = Json::array();
  for (const auto& p : params) {
    props[p.name] = p.schema;
    if (p.required) required.push_back(p.name);
  }
  Json s{{"type", "object"}, {"properties", props}};
  if (!required.empty()) s["required"] = required;
  s["additionalProperties"] = false;
  return s;
}

Json str_param(const std::string& desc) { return Json{{"type", "string"}, {"description", desc}}; }

std::shared_ptr<env::Environment> require_env(const std::shared_ptr<env::Environment>& env, const std::string& toolkit) {
  if (!env) throw BindingError("toolkit '" + toolkit + "' needs an environment");
  return env;
}

ToolOutput exec_output(const env::ExecResult& r) {
  if (r.timed_out()) return {ToolStatus::timeout, r.render().empty() ? "command timed out" : r.render() + "\n[timed out]"};
  std::string text = r.render();
  if (r.exit_code != 0) {
    if (!text.empty() && text.back() != '\n') text += '\n';
    text += fmt::format("[exit code: {}]", r.exit_code);
    return ToolOutput::error(text);
  }
  return ToolOutput::ok(text);
}

double call_timeout(const ToolContext& ctx) { return std::max(0.001, ctx.remaining_s()); }

// ---------------------------------------------------------------- documents

struct Document {
  std::string title;
  std::string url;
  std::string snippet;
  std::string content;
};

Json load_fixture(const Json& config) {
  if (config.contains("fixture")) {
    const auto path = config["fixture"].get<std::string>();
    std::ifstream in(path);
    if (!in) throw BindingError("cannot read fixture " + path);
    try {
      return Json::parse(in);
    } catch (const Json::parse_error& e) {
      throw BindingError("fixture " + path + " is not JSON: " + e.what());
    }
  }
  return Json();
}

std::vector<Document> fixture_documents(const Json& fixture, const Json& config) {
  Json docs = config.contains("documents") ? config["documents"]
              : fixture.is_object() ? fixture.value("documents", Json::array())
                                    : Json::array();
  std::vector<Document> out;
  for (const auto& d : docs) {
    out.push_back({d.value("title", ""), d.value("url", ""), d.value("snippet", ""), d.value("content", "")});
  }
  return out;
}

template <class T, class TextOf, class KeyOf>
std::vector<const T*> rank(const std::vector<T>& items, const std::string& query, std::size_t n, TextOf text_of, KeyOf key_of) {
  auto q = text::search_token_set(query);
  std::vector<std::pair<std::size_t, const T*>> scored;
  for (const auto& it : items) {
    auto toks = text::search_token_set(text_of(it));
    std::size_t s = 0;
    for (const auto& t : q) s += toks.count(t);
    if (s > 0) scored.emplace_back(s, &it);
  }
  std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return key_of(*a.second) < key_of(*b.second);
  });
  std::vector<const T*> out;
  for (std::size_t i = 0; i < scored.size() && i < n; ++i) out.push_back(scored[i].second);
  return out;
}

std::string answer_passages(const std::string& page, const std::string& question, const std::string& url) {
  const std::string body = page.find('<') != std::string::npos ? html_to_text(page) : page;
  std::vector<std::string> paras;
  std::size_t start = 0;
  while (start < body.size()) {
    auto end = body.find('\n', start);
    if (end == std::string::npos) end = body.size();
    auto p = text::trim(std::string_view(body).substr(start, end - start));
    if (!p.empty()) paras.push_back(p);
    start = end + 1;
  }
  auto q = text::search_token_set(question);
  std::vector<std::pair<std::size_t, std::size_t>> scored;
  for (std::size_t i = 0; i < paras.size(); ++i) {
    auto toks = text::search_token_set(paras[i]);
    std::size_t s = 0;
    for (const auto& t : q) s += toks.count(t);
    if (s > 0) scored.emplace_back(s, i);
  }
  std::stable_sort(scored.begin(), scored.end(), [](auto a, auto b) { return a.first > b.first; });
  std::string out = "Source: " + url + "\n";
  if (scored.empty()) return out + text::truncate_utf8(body, 1000);
  std::vector<std::size_t> picked;
  for (std::size_t i = 0; i < scored.size() && i < 3; ++i) picked.push_back(scored[i].second);
  std::sort(picked.begin(), picked.end());
  for (auto i : picked) out += "- " + text::truncate_utf8(paras[i], 500) + "\n";
  return out;
}

ToolkitFactory search_toolkit(std::shared_ptr<Fetcher> fetcher) {
  ToolkitFactory f;
  f.description = "Web search and question answering over fetched pages.";
  f.tools = {"search", "web_qa"};
  f.make = [fetcher](const Json& config, const std::shared_ptr<env::Environment>&) {
    auto fixture = load_fixture(config);
    const bool offline = config.contains("fixture") || config.contains("documents");
    auto docs = std::make_shared<std::vector<Document>>(fixture_documents(fixture, config));
    const std::string endpoint = config.value("endpoint", std::string());
    std::vector<ToolDef> out;

    ToolDef search;
    search.name = "search";
    search.description = "Search the web and return the top results with titles, URLs and snippets.";
    search.parameters = object_schema({{"query", str_param("Search query")},
                                       {"num_results", Json{{"type", "integer"}, {"minimum", 1}, {"maximum", 20}}, false}});
    search.source = ToolSource::builtin_pure;
    search.binding = offline ? "fixture" : "http:" + endpoint;
    search.handler = [docs, offline, endpoint, fetcher](const Json& args, const ToolContext& ctx) {
      const auto query = args["query"].get<std::string>();
      const std::size_t n = args.value("num_results", 5);
      std::vector<Document> results;
      if (offline) {
        for (const auto* d : rank(
                 *docs, query, n, [](const Document& d) { return d.title + " " + d.snippet + " " + d.content; },
                 [](const Document& d) { return d.url; }))
          results.push_back(*d);
      } else {
        if (endpoint.empty() || !fetcher) return ToolOutput::error("search toolkit has no endpoint configured");
        auto body = Json::parse(fetcher->get(fmt::format("{}?q={}&n={}", endpoint, url_encode(query), n), call_timeout(ctx)));
        for (const auto& r : body.value("results", Json::array())) {
          results.push_back({r.value("title", ""), r.value("url", ""), r.value("snippet", ""), ""});
          if (results.size() >= n) break;
        }
      }
      if (results.empty()) return ToolOutput::ok("No results for: " + query);
      std::string text;
      for (std::size_t i = 0; i < results.size(); ++i) {
        text += fmt::format("{}. {}\n   {}\n", i + 1, results[i].title, results[i].url);
        if (!results[i].snippet.empty()) text += "   " + results[i].snippet + "\n";
      }
      return ToolOutput::ok(text);
    };
    out.push_back(std::move(search));

    ToolDef qa;
    qa.name = "web_qa";
    qa.description = "Read a web page and return the passages most relevant to a question.";
    qa.parameters = object_schema({{"url", str_param("Page URL")}, {"question", str_param("What to look for on the page")}});
    qa.source = ToolSource::builtin_pure;
    qa.binding = search.binding;
    qa.handler = [docs, offline, fetcher](const Json& args, const ToolContext& ctx) {
      const auto url = args["url"].get<std::string>();
      std::string page;
      if (offline) {
        auto it = std::find_if(docs->begin(), docs->end(), [&](const Document& d) { return d.url == url; });
        if (it == docs->end()) return ToolOutput::error("page not found: " + url);
        page = it->content.empty() ? it->snippet : it->content;
      } else {
        if (!fetcher) return ToolOutput::error("no fetcher configured");
        page = fetcher->get(url, call_timeout(ctx));
      }
      return ToolOutput::ok(answer_passages(page, args["question"].get<std::string>(), url));
    };
    out.push_back(std::move(qa));
    return out;
  };
  return f;
}

// ---------------------------------------------------------------- arxiv

struct Paper {
  std::string id;
  std::string title;
  std::string summary;
  std::vector<std::string> authors;
  std::string published;
};

std::vector<Paper> parse_atom(const std::string& xml) {
  static const std::regex entry(R"(<entry>([\s\S]*?)</entry>)");
  auto field = [](const std::string& block, const std::string& tag) {
    std::smatch m;
    std::regex re("<" + tag + R"((?:\s[^>]*)?>([\s\S]*?)</)" + tag + ">");
    return std::regex_search(block, m, re) ? text::trim(m[1].str()) : std::string();
  };
  std::vector<Paper> out;
  for (std::sregex_iterator it(xml.begin(), xml.end(), entry), end; it != end; ++it) {
    const std::string block = (*it)[1].str();
    Paper p;
    p.id = field(block, "id");
    if (auto slash = p.id.rfind("/abs/"); slash != std::string::npos) p.id = p.id.substr(slash + 5);
    p.title = field(block, "title");
    p.summary = field(block, "summary");
    p.published = field(block, "published");
    static const std::regex author(R"(<name>([\s\S]*?)</name>)");
    for (std::sregex_iterator a(block.begin(), block.end(), author); a != std::sregex_iterator(); ++a)
      p.authors.push_back(text::trim((*a)[1].str()));
    out.push_back(std::move(p));
  }
  return out;
}

std::filesystem::path download_dir(const Json& config, const std::shared_ptr<env::Environment>& env) {
  if (config.contains("download_dir")) return config["download_dir"].get<std::string>();
  if (env && !env->scratch_dir().empty()) return env->scratch_dir() / "papers";
  return std::filesystem::temp_directory_path() / "agentkit" / "papers";
}

ToolkitFactory arxiv_toolkit(std::shared_ptr<Fetcher> fetcher) {
  ToolkitFactory f;
  f.description = "Search arXiv papers and download their PDFs.";
  f.tools = {"search_papers", "download_papers"};
  f.make = [fetcher](const Json& config, const std::shared_ptr<env::Environment>& env) {
    auto fixture = load_fixture(config);
    const bool offline = config.contains("fixture") || config.contains("papers");
    auto papers = std::make_shared<std::vector<Paper>>();
    for (const auto& p : config.contains("papers") ? config["papers"] : fixture.value("papers", Json::array())) {
      Paper x{p.value("id", ""), p.value("title", ""), p.value("summary", ""), {}, p.value("published", "")};
      for (const auto& a : p.value("authors", Json::array())) x.authors.push_back(a.get<std::string>());
      papers->push_back(std::move(x));
    }
    const std::string api = config.value("api_url", std::string("http://export.arxiv.org/api/query"));
    const std::string pdf_base = config.value("pdf_url", std::string("https://arxiv.org/pdf/"));
    const auto dir = download_dir(config, env);

    std::vector<ToolDef> out;
    ToolDef search;
    search.name = "search_papers";
    search.description = "Search arXiv for papers matching a query and list ids, titles and abstracts.";
    search.parameters = object_schema({{"query", str_param("Search query")},
                                       {"max_results", Json{{"type", "integer"}, {"minimum", 1}, {"maximum", 50}}, false}});
    search.source = ToolSource::builtin_pure;
    search.binding = offline ? "fixture" : "http:" + api;
    search.handler = [papers, offline, api, fetcher](const Json& args, const ToolContext& ctx) {
      const auto query = args["query"].get<std::string>();
      const std::size_t n = args.value("max_results", 5);
      std::vector<Paper> hits;
      if (offline) {
        for (const auto* p : rank(
                 *papers, query, n, [](const Paper& p) { return p.title + " " + p.summary; },
                 [](const Paper& p) { return p.id; }))
          hits.push_back(*p);
      } else {
        if (!fetcher) return ToolOutput::error("no fetcher configured");
        hits = parse_atom(fetcher->get(
            fmt::format("{}?search_query=all:{}&start=0&max_results={}", api, url_encode(query), n), call_timeout(ctx)));
      }
      if (hits.empty()) return ToolOutput::ok("No papers found for: " + query);
      std::string text;
      for (const auto& p : hits) {
        text += fmt::format("[{}] {}", p.id, p.title);
        if (!p.published.empty()) text += " (" + p.published + ")";
        text += "\n";
        if (!p.authors.empty()) text += "   authors: " + fmt::format("{}", fmt::join(p.authors, ", ")) + "\n";
        if (!p.summary.empty()) text += "   " + text::truncate_utf8(p.summary, 300) + "\n";
      }
      return ToolOutput::ok(text);
    };
    out.push_back(std::move(search));

    ToolDef download;
    download.name = "download_papers";
    download.description = "Download arXiv papers by id and return the saved file paths.";
    download.parameters = object_schema(
        {{"paper_ids", Json{{"type", "array"}, {"items", {{"type", "string"}}}, {"minItems", 1}, {"maxItems", 20}}}});
    download.source = ToolSource::builtin_pure;
    download.binding = search.binding;
    download.handler = [papers, offline, pdf_base, fetcher, dir](const Json& args, const ToolContext& ctx) {
      std::error_code ec;
      std::filesystem::create_directories(dir, ec);
      if (ec) return ToolOutput::error("cannot create " + dir.string() + ": " + ec.message());
      std::string text;
      for (const auto& idj : args["paper_ids"]) {
        const auto id = idj.get<std::string>();
        std::string body;
        if (offline) {
          auto it = std::find_if(papers->begin(), papers->end(), [&](const Paper& p) { return p.id == id; });
          if (it == papers->end()) return ToolOutput::error("unknown paper id: " + id);
          body = it->title + "\n\n" + it->summary + "\n";
        } else {
          if (!fetcher) return ToolOutput::error("no fetcher configured");
          body = fetcher->get(pdf_base + id, call_timeout(ctx));
        }
        std::string file = id;
        std::replace(file.begin(), file.end(), '/', '_');
        auto path = dir / (file + ".pdf");
        std::ofstream(path, std::ios::binary) << body;
        text += path.string() + "\n";
      }
      return ToolOutput::ok(text);
    };
    out.push_back(std::move(download));
    return out;
  };
  return f;
}

// ---------------------------------------------------------------- env-bound

ToolkitFactory python_toolkit() {
  ToolkitFactory f;
  f.description = "Run Python code in the sandbox.";
  f.tools = {"execute_python_code"};
  f.needs_env = true;
  f.make = [](const Json&, const std::shared_ptr<env::Environment>& e) {
    auto env = require_env(e, "python_executor");
    ToolDef t;
    t.name = "execute_python_code";
    t.description = "Execute Python source in the sandbox and return stdout/stderr. Print results you need.";
    t.parameters = object_schema({{"code", str_param("Python source code")}});
    t.source = ToolSource::builtin_env;
    t.binding = "env.exec_code";
    t.handler = [env](const Json& args, const ToolContext& ctx) {
      return exec_output(env->exec_code(args["code"].get<std::string>(), call_timeout(ctx)));
    };
    return std::vector<ToolDef>{std::move(t)};
  };
  return f;
}

ToolkitFactory shell_toolkit() {
  ToolkitFactory f;
  f.description = "Run shell commands in the environment.";
  f.tools = {"run_command"};
  f.needs_env = true;
  f.make = [](const Json&, const std::shared_ptr<env::Environment>& e) {
    auto env = require_env(e, "shell");
    ToolDef t;
    t.name = "run_command";
    t.description = "Run a shell command and return its output and exit code.";
    t.parameters = object_schema({{"command", str_param("Shell command line")}});
    t.source = ToolSource::builtin_env;
    t.binding = "env.exec_command";
    t.handler = [env](const Json& args, const ToolContext& ctx) {
      return exec_output(env->exec_command(args["command"].get<std::string>(), call_timeout(ctx)));
    };
    return std::vector<ToolDef>{std::move(t)};
  };
  return f;
}

ToolkitFactory env_state_toolkit() {
  ToolkitFactory f;
  f.description = "Inspect the environment state.";
  f.tools = {"get_env_state"};
  f.needs_env = true;
  f.make = [](const Json&, const std::shared_ptr<env::Environment>& e) {
    auto env = require_env(e, "env_state");
    ToolDef t;
    t.name = "get_env_state";
    t.description = "Return the environment's state snapshot (backend, working directory, last exit code).";
    t.parameters = object_schema({});
    t.source = ToolSource::builtin_env;
    t.binding = "env.state_snapshot";
    t.handler = [env](const Json&, const ToolContext&) { return ToolOutput::ok(env->state_snapshot().dump()); };
    return std::vector<ToolDef>{std::move(t)};
  };
  return f;
}

std::filesystem::path resolve_inside(const std::filesystem::path& root, const std::string& rel) {
  namespace fs = std::filesystem;
  if (fs::path(rel).is_absolute()) throw std::invalid_argument("path must be relative to the scratch directory: " + rel);
  auto base = fs::weakly_canonical(root);
  auto full = fs::weakly_canonical(base / rel);
  auto b = base.string();
  auto s = full.string();
  if (s != b && s.rfind(b + "/", 0) != 0) throw std::invalid_argument("path escapes the scratch directory: " + rel);
  return full;
}

ToolkitFactory file_toolkit() {
  ToolkitFactory f;
  f.description = "Read and write files inside the scratch directory.";
  f.tools = {"read_file", "write_file"};
  f.needs_env = true;
  f.make = [](const Json& config, const std::shared_ptr<env::Environment>& env) {
    std::filesystem::path root;
    if (config.contains("root")) root = config["root"].get<std::string>();
    else if (env) root = env->scratch_dir();
    if (root.empty()) throw BindingError("toolkit 'file' needs a scratch directory or config.root");
    std::vector<ToolDef> out;
    ToolDef r;
    r.name = "read_file";
    r.description = "Read a text file from the scratch directory.";
    r.parameters = object_schema({{"path", str_param("Path relative to the scratch directory")}});
    r.source = ToolSource::builtin_env;
    r.binding = "fs:" + root.string();
    r.handler = [root](const Json& args, const ToolContext&) {
      auto path = resolve_inside(root, args["path"].get<std::string>());
      std::ifstream in(path, std::ios::binary);
      if (!in) return ToolOutput::error("cannot read " + args["path"].get<std::string>());
      std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
      if (body.size() > env::kDefaultOutputCap) {
        auto n = body.size();
        body = text::truncate_utf8(body, env::kDefaultOutputCap) + fmt::format("\n[output truncated: {} bytes total]", n);
      }
      return ToolOutput::ok(body);
    };
    out.push_back(r);
    ToolDef w;
    w.name = "write_file";
    w.description = "Write text to a file in the scratch directory, replacing any previous content.";
    w.parameters = object_schema({{"path", str_param("Path relative to the scratch directory")}, {"content", str_param("File content")}});
    w.source = ToolSource::builtin_env;
    w.binding = r.binding;
    w.handler = [root](const Json& args, const ToolContext&) {
      auto path = resolve_inside(root, args["path"].get<std::string>());
      std::filesystem::create_directories(path.parent_path());
      std::ofstream o(path, std::ios::binary);
      if (!o) return ToolOutput::error("cannot write " + args["path"].get<std::string>());
      const auto& content = args["content"].get_ref<const std::string&>();
      o << content;
      return ToolOutput::ok(fmt::format("wrote {} bytes to {}", content.size(), args["path"].get<std::string>()));
    };
    out.push_back(w);
    return out;
  };
  return f;
}

// ---------------------------------------------------------------- pure

ToolkitFactory time_toolkit() {
  ToolkitFactory f;
  f.description = "Current date and time.";
  f.tools = {"current_time"};
  f.make = [](const Json& config, const std::shared_ptr<env::Environment>&) {
    const std::string fixed = config.value("fixed", std::string());
    ToolDef t;
    t.name = "current_time";
    t.description = "Return the current UTC date and time in ISO-8601 format.";
    t.parameters = object_schema({});
    t.source = ToolSource::builtin_pure;
    t.binding = fixed.empty() ? "clock" : "fixed";
    t.handler = [fixed](const Json&, const ToolContext&) {
      if (!fixed.empty()) return ToolOutput::ok(fixed);
      std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
      std::tm tm{};
      gmtime_r(&now, &tm);
      char buf[32];
      std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
      return ToolOutput::ok(buf);
    };
    return std::vector<ToolDef>{std::move(t)};
  };
  return f;
}

ToolkitFactory math_toolkit() {
  ToolkitFactory f;
  f.description = "Evaluate arithmetic expressions.";
  f.tools = {"calculate"};
  f.make = [](const Json&, const std::shared_ptr<env::Environment>&) {
    ToolDef t;
    t.name = "calculate";
    t.description = "Evaluate an arithmetic expression such as '2^10 / (3 + 5)' or 'sqrt(2) * pi'.";
    t.parameters = object_schema({{"expression", str_param("Arithmetic expression")}});
    t.source = ToolSource::builtin_pure;
    t.binding = "math_eval";
    t.handler = [](const Json& args, const ToolContext&) {
      try {
        return ToolOutput::ok(format_number(evaluate_expression(args["expression"].get<std::string>())));
      } catch (const MathError& e) {
        return ToolOutput::error(e.what());
      }
    };
    return std::vector<ToolDef>{std::move(t)};
  };
  return f;
}

}  // namespace

ToolkitCatalog ToolkitCatalog::builtin(std::shared_ptr<Fetcher> fetcher) {
  if (!fetcher) fetcher = std::make_shared<HttpFetcher>();
  ToolkitCatalog c;
  c.add("search", search_toolkit(fetcher));
  c.add("arxiv", arxiv_toolkit(fetcher));
  c.add("python_executor", python_toolkit());
  c.add("shell", shell_toolkit());
  c.add("file", file_toolkit());
  c.add("time", time_toolkit());
  c.add("math_eval", math_toolkit());
  c.add("env_state", env_state_toolkit());
  return c;
}

void ToolkitCatalog::add(const std::string& name, ToolkitFactory factory) {
  if (factories_.count(name)) throw BindingError("toolkit '" + name + "' is already registered");
  factories_.emplace(name, std::move(factory));
}

void ToolkitCatalog::replace(const std::string& name, ToolkitFactory factory) { factories_[name] = std::move(factory); }

const ToolkitFactory* ToolkitCatalog::find(const std::string& name) const {
  auto it = factories_.find(name);
  return it == factories_.end() ? nullptr : &it->second;
}

std::vector<std::string> ToolkitCatalog::names() const {
  std::vector<std::string> out;
  for (const auto& [n, _] : factories_) out.push_back(n);
  return out;
}

config::RegistrySnapshot ToolkitCatalog::snapshot() const {
  config::RegistrySnapshot s;
  for (const auto& [n, f] : factories_) s.toolkits[n] = f.tools;
  return s;
}

ToolRegistry build_registry(const config::AgentConfig& cfg, const std::shared_ptr<env::Environment>& env,
                            const ToolkitCatalog& catalog) {
  ToolRegistry reg;
  reg.set_tool_timeout(cfg.timeouts.tool_s);
  for (const auto& [toolkit, activation] : cfg.toolkits) {
    const auto* factory = catalog.find(toolkit);
    if (!factory) throw UnknownToolkit("unknown toolkit '" + toolkit + "'");
    for (const auto& t : activation.activated_tools) {
      if (std::find(factory->tools.begin(), factory->tools.end(), t) == factory->tools.end()) {
        throw UnknownTool(fmt::format("toolkit '{}' has no tool '{}'", toolkit, t));
      }
    }
    if (factory->needs_env && !env) throw BindingError("toolkit '" + toolkit + "' needs an environment");
    std::vector<ToolDef> defs;
    try {
      defs = factory->make(activation.config, env);
    } catch (const ToolError&) {
      throw;
    } catch (const std::exception& e) {
      throw BindingError(fmt::format("toolkit '{}' failed to bind: {}", toolkit, e.what()));
    }
    std::set<std::string> wanted(activation.activated_tools.begin(), activation.activated_tools.end());
    for (auto& d : defs) {
      if (!wanted.empty() && !wanted.count(d.name)) continue;
      reg.add(std::move(d), toolkit);
    }
  }
  return reg;
}

}  // namespace agentkit::tools
