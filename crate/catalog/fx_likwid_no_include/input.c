#include <stdio.h>

void bump(int *c, int n)
{
    #pragma omp atomic
    {
        c[0] = c[0] + n;
    }
}
