#include <stdio.h>
#include <string.h>

#include "utimage.h"

int main(void) {
    UtiPoly *p = NULL;
    if (utimage_poly_parse("x1*x2 - x2*x1", 2, "q=5", &p) != UTI_OK) {
        fprintf(stderr, "parse: %s\n", utimage_last_error_message());
        return 1;
    }
    uintptr_t order = 0;
    if (utimage_poly_order(p, &order) != UTI_OK || order != 1) {
        return 2;
    }
    char *json = NULL;
    if (utimage_classify_json(p, 3, &json) != UTI_OK || strstr(json, "\"theorem_case\":\"ii\"") == NULL) {
        return 3;
    }
    utimage_string_free(json);
    if (utimage_preimage_json(p, "[[1,0],[0,1]]", &json) != UTI_NOT_IN_IMAGE) {
        return 4;
    }
    utimage_poly_free(p);
    printf("order %u ok\n", (unsigned)order);
    return 0;
}
