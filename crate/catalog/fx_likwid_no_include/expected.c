#include <stdio.h>

void bump(int *c, int n)
{
    #pragma omp atomic
    {
        LIKWID_MARKER_START(__func__);
        c[0] = c[0] + n;
        LIKWID_MARKER_STOP(__func__);
    }
}
