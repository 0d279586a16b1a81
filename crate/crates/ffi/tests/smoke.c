#include <stdio.h>
#include <string.h>
#include "approvalmap.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "line %d: %s (%s)\n", __LINE__, #cond, am_last_error()); return 1; } } while (0)

int main(void) {
    AmElection *empty = NULL, *full = NULL, *sampled = NULL;
    CHECK(am_election_from_text("4 2\n\n\n", &empty) == AM_STATUS_OK);
    size_t offsets[] = {0, 4, 8};
    size_t cands[] = {0, 1, 2, 3, 0, 1, 2, 3};
    CHECK(am_election_from_ballots(4, 2, offsets, cands, &full) == AM_STATUS_OK);

    double d = -1.0;
    CHECK(am_distance(empty, full, AM_METRIC_APPROVALWISE, &d) == AM_STATUS_OK && d == 4.0);
    CHECK(am_distance(empty, full, AM_METRIC_ISOMORPHIC_HAMMING, &d) == AM_STATUS_OK && d == 8.0);

    CHECK(am_election_sample("{\"kind\": \"resampling\", \"p\": 0.5, \"phi\": 0.5}", 6, 20, 7, &sampled) == AM_STATUS_OK);
    size_t m = 0, n = 0;
    CHECK(am_election_size(sampled, &m, &n) == AM_STATUS_OK && m == 6 && n == 20);

    AmStatistics stats;
    CHECK(am_statistics(full, 2, 10.0, &stats) == AM_STATUS_OK);
    CHECK(stats.max_score == 1.0 && stats.cohesiveness_level == 2 && stats.pav_optimal == 1);

    size_t members[2];
    double score = 0.0;
    CHECK(am_pav_committee(full, 2, 10.0, members, &score, NULL) == AM_STATUS_OK);
    CHECK(members[0] == 0 && members[1] == 1 && score == 3.0);

    char *text = NULL;
    CHECK(am_election_to_text(full, &text) == AM_STATUS_OK && strncmp(text, "4 2\n", 4) == 0);
    am_string_free(text);

    AmElection *bad = NULL;
    CHECK(am_election_from_text("2 1\n5\n", &bad) != AM_STATUS_OK && bad == NULL);
    CHECK(strlen(am_last_error()) > 0);

    am_election_free(empty);
    am_election_free(full);
    am_election_free(sampled);
    printf("ok %s\n", am_version());
    return 0;
}
