#include <stdio.h>
#include <string.h>

#include "spsmc.h"

static int fail(const char *what) {
    const char *msg = spsmc_last_error_message();
    fprintf(stderr, "%s: %s\n", what, msg ? msg : "(no message)");
    return 1;
}

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: smoke FILE.spsml\n");
        return 2;
    }
    SpsmcInput *input = NULL;
    if (spsmc_input_load(argv[1], NULL, &input) != SPSMC_STATUS_OK) return fail("load");

    char *text = NULL;
    if (spsmc_bound(input, &text) != SPSMC_STATUS_OK) return fail("bound");
    printf("%s", text);
    spsmc_string_free(text);

    SpsmcVerdict verdict;
    if (spsmc_check(input, SPSMC_AT_BOUND_BLOCK, &verdict, NULL) != SPSMC_STATUS_OK) return fail("check");
    printf("verdict: %s\n", verdict == SPSMC_VERDICT_HOLDS ? "holds" : "violated");

    SpsmcInput *bad = NULL;
    SpsmcStatus status = spsmc_input_from_text("G (", SPSMC_SOURCE_KIND_SPEC, NULL, &bad);
    printf("parse status: %d\n", (int)status);

    spsmc_input_free(input);
    return 0;
}
