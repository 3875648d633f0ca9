"""Release-layout benchmark stand-in with the published dataset's statistics.

The real release is not redistributable here, so loader tests run against a
file with the same on-disk shape and the same 50-query / 295-cluster / 5.9
mean-clusters statistics. Set CROQS_RELEASE_PATH to the real file to exercise
the adapter against it instead.
"""


def release_shaped_doc(query_count=50, total_clusters=295):
    sizes = list(range(2, 11)) + [6] * 36 + [5] * 5
    assert len(sizes) == query_count and sum(sizes) == total_clusters
    doc = {}
    next_image = 1
    for qi, size in enumerate(sizes):
        clusters = {}
        for ci in range(size):
            images = [next_image + j for j in range(3)]
            next_image += 3
            clusters[f"group {ci:02d}"] = {
                "suggestion": f"refined query {qi:02d}-{ci:02d}",
                "images": images,
            }
        doc[f"initial query {qi:02d}"] = {"clusters": clusters}
    return doc
