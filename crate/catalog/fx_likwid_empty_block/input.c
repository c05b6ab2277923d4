#include <omp.h>

void phase(void)
{
    #pragma omp barrier
    {
    }
}
