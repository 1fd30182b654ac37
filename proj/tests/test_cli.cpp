#include <doctest.h>

#include <cstdint>
#include <filesystem>
#include <sstream>

#include "cli.hpp"
#include "tdm/database.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run tdm_run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = tdm::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("tdm-cli-" + std::to_string(reinterpret_cast<std::uintptr_t>(this)) + "-" +
            std::to_string(std::rand()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name, const std::string& contents = {}) const {
    std::string p = (path / name).string();
    if (!contents.empty()) {
      tdm::write_file(p, contents);
    }
    return p;
  }
};

const std::string kCorpus = std::string(TDM_DATA_DIR) + "/corpus.tdc";
const char* kF3 =
    "(defunt f3 (x y)\n  (if (consp x)\n      (if (atom y)\n          (list (f3 (cddr x) y) "
    "(f3 (cadr x) y))\n        (f3 (cdr x) y))\n    (list x y)))\n";

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("mine and stats") {
  TempDir t;
  std::string db = t.file("c.tdb");
  Run m = tdm_run({"mine", kCorpus, "-o", db});
  CHECK(m.code == 0);
  CHECK(m.out.find("entries=7 functions=30 groups=2") != std::string::npos);
  Run s = tdm_run({"stats", db});
  CHECK(s.code == 0);
  CHECK(s.out == "entries=7 functions=30 groups=2\n");

  std::string bad = t.file("bad.tdc", "(defun grow (x) (if (consp x) (grow (cons x x)) nil))\n");
  std::string out = t.file("bad.tdb");
  Run r = tdm_run({"mine", bad, "-o", out});
  CHECK(r.code == 2);
  CHECK(fs::exists(out));
  CHECK(r.out.find("rejected grow") != std::string::npos);

  std::string strict_out = t.file("strict.tdb");
  Run st = tdm_run({"mine", "--strict", bad, "-o", strict_out});
  CHECK(st.code == 1);
  CHECK_FALSE(fs::exists(strict_out));
}

TEST_CASE("prove, verify, extend") {
  TempDir t;
  std::string db = t.file("c.tdb");
  REQUIRE(tdm_run({"mine", kCorpus, "-o", db}).code == 0);
  std::string f3 = t.file("f3.tdc", kF3);
  std::string cert = t.file("f3.cert");
  std::string plan = t.file("f3.plan");

  Run p = tdm_run({"prove", "--db", db, "--out", cert, "--plan", plan, f3});
  REQUIRE(p.code == 0);
  CHECK(p.out ==
        "*note*: Using termination theorems for SYMBOL-BTREE-TO-ALIST-AUX, EVENS and TRUE-LISTP.\n"
        "*note*: Requires book misc/symbol-btree for SYMBOL-BTREE-TO-ALIST-AUX.\n");
  CHECK(fs::exists(plan));

  Run v = tdm_run({"verify", "--db", db, cert, f3});
  CHECK(v.code == 0);
  CHECK(v.out == "accepted\n");

  Run one = tdm_run({"prove", "--no-two-pass", "--db", db, "--out", cert, f3});
  CHECK(one.code == 0);

  Run ext = tdm_run({"prove", "--extend", "--db", db, "--out", cert, f3});
  CHECK(ext.code == 0);
  CHECK(tdm_run({"stats", db}).out == "entries=8 functions=31 groups=2\n");
  // The database changed, so the certificate no longer matches it.
  Run stale = tdm_run({"verify", "--db", db, cert, f3});
  CHECK(stale.code == 4);
  CHECK(stale.out.rfind("rejected at header:", 0) == 0);

  std::string grow = t.file("grow.tdc", "(defun grow (x) (if (consp x) (grow (cons x x)) nil))");
  Run nm = tdm_run({"prove", "--db", db, "--out", t.file("g.cert"), grow});
  CHECK(nm.code == 3);

  std::string fb = t.file("fb.tdc", "(defun g (n m) (if (zp m) n (g n (1- m))))");
  Run fallback = tdm_run({"prove", "--db", t.file("empty.tdb",
                                                  "format 1\ntheory theory-v1\nentries 0\n"
                                                  "functions 0\n"),
                          "--out", t.file("fb.cert"), fb});
  CHECK(fallback.code == 0);
  CHECK(fallback.out.find("default measure (acl2-count m)") != std::string::npos);
  Run nofb = tdm_run({"prove", "--no-fallback", "--db", t.file("empty.tdb"), "--out",
                      t.file("fb.cert"), fb});
  CHECK(nofb.code == 3);
}

TEST_CASE("session file") {
  TempDir t;
  std::string db = t.file("c.tdb");
  REQUIRE(tdm_run({"mine", kCorpus, "-o", db}).code == 0);
  std::string session = t.file(
      "session.tdc",
      "(defun symbol-btree-to-alist-aux (x acc) (if (consp x) "
      "(symbol-btree-to-alist-aux (cadr x) (cons (car x) acc)) acc))\n");
  Run p = tdm_run({"prove", "--db", db, "--session", session, "--out", t.file("c.cert"),
                   t.file("f3.tdc", kF3)});
  CHECK(p.code == 0);
  CHECK(p.out.find("Requires book") == std::string::npos);
}

TEST_CASE("check") {
  TempDir t;
  Run ok = tdm_run({"check", t.file("f3.tdc", kF3)});
  CHECK(ok.code == 0);
  CHECK(ok.out.find("clause 2 proven") != std::string::npos);

  Run bad = tdm_run({"--max-count", "2", "check",
                     t.file("g.tdc", "(defun g (x) (if (consp x) (g (cons x x)) nil))")});
  CHECK(bad.code == 5);
  CHECK(bad.out.find("counterexample x=(nil . nil)") != std::string::npos);
}

TEST_CASE("errors") {
  TempDir t;
  CHECK(tdm_run({}).code == 1);
  CHECK(tdm_run({"bogus"}).code == 1);
  CHECK(tdm_run({"--help"}).code == 0);
  Run missing = tdm_run({"stats", t.file("none.tdb")});
  CHECK(missing.code == 1);
  CHECK(missing.err.find("cannot open") != std::string::npos);
  Run parse = tdm_run({"check", t.file("p.tdc", "(defun f (x) (car x x))")});
  CHECK(parse.code == 1);
  CHECK(parse.err.find("parse error") != std::string::npos);
  Run two = tdm_run({"prove", "--db", t.file("e.tdb", "format 1\ntheory theory-v1\nentries 0\n"
                                                      "functions 0\n"),
                     "--out", t.file("x.cert"),
                     t.file("two.tdc", "(defun a (x) x)\n(defun b (x) x)\n")});
  CHECK(two.code == 1);
}

}  // TEST_SUITE
