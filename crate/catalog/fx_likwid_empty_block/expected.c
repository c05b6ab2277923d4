#include <omp.h>
#include <likwid-marker.h>

void phase(void)
{
    #pragma omp barrier
    {
        LIKWID_MARKER_START(__func__);
        LIKWID_MARKER_STOP(__func__);
    }
}
