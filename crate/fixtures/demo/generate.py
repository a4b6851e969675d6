# Regenerates the demo corpus. Labels are assigned by construction, and
# expected.json is derived here, independently of the Rust pipeline.
import json, gzip, csv, os
from collections import Counter
os.chdir(os.path.dirname(os.path.abspath(__file__)))
os.makedirs("resolver", exist_ok=True)
entries = []
labels = []
persist = []
DEL = "https://www.crossref.org/_deleted-doi/"
def ra(name): return [{"DOI": "x", "RA": name}]
def landing(u="https://publisher.example/landing"): return [{"status": 302, "location": u}, {"status": 200}]
def work(t, title, container=None, **kw):
    m = {"type": t, "title": [title]}
    if container: m["container-title"] = [container]
    for k, v in kw.items(): m[k] = v
    return {"status": "ok", "message-type": "work", "message": m}
NF = "Resource not found."
def add(doi, label, **kw):
    e = {"doi": doi}; e.update(kw); entries.append(e)
    if label: labels.append((doi, label))

for d in ["10.5555/ghost-001", "10.5555/ghost-002", "10.9999/never-registered"]:
    add(d, "non_existing", ra_response=[{"DOI": d, "status": "DOI does not exist"}])
for d, r in [("10.5061/dryad.abc123", "DataCite"), ("10.5281/zenodo.12345", "DataCite"), ("10.3280/ecag2013-001", "mEDRA"), ("10.11501/3046989", "JaLC")]:
    add(d, "excluded_non_crossref", ra_response=[{"DOI": d, "RA": r}])
add("10.1234/defunct-1", "defunct", ra_response=ra("Crossref"), redirect_chain=[{"status": 302, "location": DEL}, {"status": 200}])
add("10.1234/defunct-2", "defunct", ra_response=ra("Crossref"), redirect_chain=[{"status": 301, "location": "https://doi.org/10.1234/defunct-2"}, {"status": 302, "location": DEL + "?doi=10.1234/defunct-2"}, {"status": 200}])
add("10.1234/defunct-3", "defunct", ra_response=ra("Crossref"), redirect_chain=[{"status": 302, "location": DEL}, {"status": 404}])
add("10.4321/defunct-4", "defunct", ra_response=ra("Crossref"), redirect_chain=[{"status": 303, "location": DEL}])
add("10.1234/noredirect-1", "no_redirect", ra_response=ra("Crossref"), redirect_chain=[{"status": 404}])
add("10.1234/noredirect-2", "no_redirect", ra_response=ra("Crossref"), redirect_chain=[{"status": 200}])
add("10.1234/noredirect-3", "no_redirect", ra_response=ra("Crossref"), redirect_chain=[{"status": 404}], redirect_method="GET")
add("10.4321/noredirect-4", "no_redirect", ra_response=ra("Crossref"), redirect_chain=[{"status": 410}])

primaries = {}
def alias(a, p, ptype="journal-article", ptitle="Primary record", pcont="Some Journal", via="conflict", **pk):
    kw = dict(ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=NF)
    if via == "conflict": kw["alias_of"] = p
    else: kw["handle_response"] = {"responseCode": 1, "handle": a, "values": [{"index": 1, "type": "HS_ALIAS", "data": {"format": "string", "value": p}}]}
    add(a, "alias", **kw)
    if p not in primaries:
        primaries[p] = work(ptype, ptitle, pcont, **pk)
for a in ["10.14359/15303", "10.14359/15304", "10.14359/15305"]:
    alias(a, "10.14359/15306", ptitle="Concrete Durability", pcont="ACI Materials Journal")
alias("10.1007//s12445-012-0033-7", "10.1007/s12445-012-0033-7", ptitle="Cell Biology Work", pcont="Protoplasma")
alias("10.1007//s00401-011-0900-1", "10.1007/s00401-011-0900-1", ptitle="Neuropathology", pcont="Acta Neuropathologica")
alias("10.1002//jcc.21001", "10.1002/jcc.21001", ptitle="Computational Chemistry", pcont="Journal of Computational Chemistry", via="handle")
alias("10.1002//anie.200900001", "10.1002/anie.200900001", ptitle="Angewandte Work", pcont="Angewandte Chemie")
alias("10.4018/9781591401087.ch001", "10.4018/978-1-59140-108-7.ch001", ptype="book-chapter", ptitle="Introduction", pcont="Encyclopedia of Information Science")
alias("10.4018/9781591401094.ch002", "10.4018/978-1-59140-109-4.ch002", ptype="book-chapter", ptitle="Chapter Two", pcont="Encyclopedia of Information Science")
alias("10.1163/2214-8647_dnp_e1000010", "10.1163/1574-9347_dnp_e1000010", ptype="reference-entry", ptitle="Aba", pcont="Brill's New Pauly")
big = "10.1016/s1876-6102(14)00454-8"
for i in range(1, 9):
    alias(f"10.1016/j.egypro.2014.11.{i:03d}", big, ptitle="Volume Removed - Publisher's Disclaimer", pcont="Energy Procedia", volume="63", page="1-8000")
for s in ["spe-1001-ms", "spe-1002-ms", "spe-1003-ms", "spe-2001-pa"]:
    alias(f"10.2523/{s}", f"10.2118/{s}", ptype="proceedings-article", ptitle="Reservoir Study", pcont="SPE Annual Technical Conference", via="handle" if s.endswith("pa") else "conflict")
alias("10.2307/1234567", "10.1090/s0002-9947-1950-0000001-1", ptitle="On Series", pcont="Transactions of the AMS")
alias("10.2307/2345678", "10.1090/s0002-9939-1951-0000002-2", ptitle="On Sums", pcont="Proceedings of the AMS")
alias("10.1037/h0099051-a", "10.1037/h0099051", ptitle="Forty-Third Annual Meeting", pcont="American Journal of Orthopsychiatry")
alias("10.3109/abc.1", "10.1080/xyz.1", ptitle="Informa Paper", pcont="Informa Journal")
add("10.1234/orphan-alias", "alias", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=NF,
    handle_response={"responseCode": 1, "handle": "10.1234/orphan-alias", "values": [{"index": 100, "type": "HS_ADMIN", "data": {}}]})
add("10.1234/deleted-title", "deleted_description", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=work("journal-article", "DELETED"))
add("10.1234/deleted-container", "deleted_description", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=work("journal-article", "Some Paper", "Deleted Journal Records"))
add("10.4321/deleted-chapter", "deleted_description", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=work("book-chapter", "This chapter was deleted by the publisher"))
add("10.1234/alias-to-deleted", "deleted_description", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=NF, alias_of="10.1234/deleted-target")
primaries["10.1234/deleted-target"] = work("journal-article", "This article has been deleted", "Journal of Things")
add("10.1234/other-found-1", "other", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=work("journal-article", "A perfectly normal article", "Normal Journal"))
add("10.1234/other-found-2", "other", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response=work("dataset", "Sensor readings", "Data Repository"))
add("10.1234/other-error", "other", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response={"error": 400})
loop = [{"status": 302, "location": f"https://loop.example/{i}"} for i in range(12)]
add("10.1234/other-loop", "other", ra_response=ra("Crossref"), redirect_chain=loop, metadata_response=work("component", "Loop target"))
add("10.1234/unclass-ra", "unclassifiable", ra_response={"error": 503})
add("10.1234/unclass-trace", "unclassifiable", ra_response=ra("Crossref"), redirect_chain=[{"status": 0}])
add("10.1234/unclass-meta", "unclassifiable", ra_response=ra("Crossref"), redirect_chain=landing(), metadata_response={"error": 503})

for p, m in sorted(primaries.items()):
    entries.append({"doi": p, "metadata_response": m})
    persist.append(p)
persist += [f"10.{pre}/kept-{i}" for pre in ["1002", "1016", "1234", "2307", "4321", "14359", "1007", "2523", "4018", "1163", "1037", "3109", "5555", "9999", "5061", "5281", "3280", "11501"] for i in range(3)]
cands = [d for d, _ in labels]
new_in_b = [f"10.7777/new-{i}" for i in range(5)]

def variant(d, k):
    # case and percent-encoding spellings that normalize to d
    if k % 3 == 0: return d.upper()
    if k % 3 == 1: return d.replace("/", "%2F", 1) if "//" not in d else d.upper()
    return ("  " + d.replace("-", "%2d", 1)) if "-" in d else d.upper() + "\t"

a_lines = []
for i, d in enumerate(cands + persist):
    a_lines.append(d)
    if i % 4 == 0: a_lines.append(variant(d, i))
a_lines.insert(7, "not a doi")
a_lines.insert(20, "")
a_lines.insert(33, "11.1234/bad-prefix")
with open("snapshot_2017.txt.gz", "wb") as raw:
    with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as f:
        f.write(("\r\n".join(a_lines) + "\r\n").encode())
with open("snapshot_2021.jsonl", "w") as f:
    for i, d in enumerate(persist + new_in_b):
        f.write(json.dumps({"DOI": d.upper() if i % 5 == 0 else d, "type": "journal-article"}) + "\n")
with open("resolver/recorded.jsonl", "w") as f:
    for e in entries: f.write(json.dumps(e) + "\n")
with open("labels.csv", "w", newline="") as f:
    w = csv.writer(f, lineterminator="\n"); w.writerow(["doi", "class"])
    for d, l in sorted(labels): w.writerow([d, l])
print(len(cands), "candidates;", len(persist), "persisting;", len(entries), "fixture entries;", len(a_lines), "lines in A")
print(Counter(l for _, l in labels))

# independent expectations, derived from construction rather than from the pipeline
from decimal import Decimal, ROUND_HALF_UP
def pct(c, d): return str((Decimal(100 * c) / Decimal(d)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)) if d else "0.00"
deleted_keys = ["non_existing", "defunct", "no_redirect", "alias", "deleted_description", "other"]
cls = Counter(l for _, l in labels)
deleted = [d for d, l in labels if l in deleted_keys]
pairs = [(e["doi"], e.get("alias_of") or next(v["data"]["value"] for v in e["handle_response"]["values"] if v["type"] == "HS_ALIAS"))
         for e in entries if dict(labels).get(e["doi"]) == "alias" and (e.get("alias_of") or any(v["type"] == "HS_ALIAS" for v in e.get("handle_response", {}).get("values", [])))]
def split(d): return d.split("/", 1)
pat = Counter()
for a, p in pairs:
    (pa, sa), (pp, sp) = split(a), split(p)
    pat["suffix_only" if pa == pp else ("prefix_only" if sa == sp else "prefix_and_suffix")] += 1
baseline = Counter(split(d)[0] for d in cands + persist)
dp = Counter(split(d)[0] for d in deleted)
rows = sorted(dp.items(), key=lambda kv: (-kv[1], kv[0]))
groups = Counter(p for _, p in pairs)
expected = {
    "candidates": len(cands),
    "unique_a": len(cands) + len(persist),
    "unique_b": len(persist) + len(new_in_b),
    # one blank and two malformed lines were inserted into A
    "records_a": len(a_lines) - 3,
    "malformed_a": 2,
    "records_b": len(persist) + len(new_in_b),
    "classes": {k: cls[k] for k in deleted_keys + ["excluded_non_crossref", "unclassifiable"]},
    "deleted": len(deleted),
    "alias_pairs": len(pairs),
    "patterns": {k: pat[k] for k in ["suffix_only", "prefix_and_suffix", "prefix_only"]},
    "top_primary": max(groups.items(), key=lambda kv: (kv[1], kv[0])),
    "alias_groups": len(groups),
    "prefixes": [{"prefix": p, "count": c, "p1": pct(c, len(deleted)), "baseline": baseline[p], "p2": pct(c, baseline[p])} for p, c in rows],
    "top_edit_pattern": {"description": "Delete a slash (/) once.", "count": sum(1 for a, p in pairs if split(a)[1] == "/" + split(p)[1])},
    "review_queue": sorted(d for d, l in labels if l == "deleted_description"),
}
with open("expected.json", "w") as f: json.dump(expected, f, indent=2); f.write("\n")
